"""Run configuration: a flat sectioned key=value text format.

Grammar (see README for a full example)::

    # comment (also after values)
    [section]
    key = value

Sections and keys:

    [user1] / [user2]
        v_s            modulation variance, required
        v_0            preparation variance, default 1.0
    [channel]
        alpha_db_per_km, distance_km    fiber model, or
        eta                             direct transmittance
        w              EPR ancilla variance, default 1.0
        sigma          receiver environment variance, default 1.0
    [chaos]
        m1, m2         correction factors, or
        psd_omega_low, psd_omega_high, psd_density
                       flat spreading band applied to both users
    [model]
        psi_mode       paper_literal | derived (default paper_literal)
        xi_mode        paper_literal | derived (default paper_literal)
        beta           reconciliation efficiency, default 1.0
        gamma_rule     interferer | fixed (default interferer)
        gamma, gamma0  required when gamma_rule = fixed

Unknown sections or keys are rejected with the offending line number.
If both eta and (alpha, distance) are given, eta wins and a warning is
recorded on the parsed config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .chaos import PsdSpec, correction_factor_from_psd, flat_band_density_for
from .network import (
    GAMMA_RULES,
    PSI_MODES,
    XI_MODES,
    ChannelParams,
    QcdmaParams,
    UserParams,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config"]

_SCHEMA: dict[str, set[str]] = {
    "user1": {"v_s", "v_0"},
    "user2": {"v_s", "v_0"},
    "channel": {"alpha_db_per_km", "distance_km", "eta", "w", "sigma"},
    "chaos": {"m1", "m2", "psd_omega_low", "psd_omega_high", "psd_density"},
    "model": {"psi_mode", "xi_mode", "beta", "gamma_rule", "gamma", "gamma0"},
}

_STRING_KEYS = {("model", "psi_mode"), ("model", "xi_mode"), ("model", "gamma_rule")}


class ConfigError(ValueError):
    """Raised for unparseable or invalid run configuration."""


@dataclass
class RunConfig:
    """Parsed configuration plus any non-fatal warnings."""

    values: dict[tuple[str, str], float | str]
    warnings: list[str] = field(default_factory=list)
    source: str = "<config>"

    def get(self, section: str, key: str, default=None):
        return self.values.get((section, key), default)

    def require(self, section: str, key: str):
        try:
            return self.values[(section, key)]
        except KeyError:
            raise ConfigError(
                f"{self.source}: missing required key '{key}' in section [{section}]"
            ) from None

    def set_value(self, section: str, key: str, value) -> None:
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown config key '{section}.{key}'")
        if (section, key) not in _STRING_KEYS:
            value = _parse_number(value, self.source, 0, key)
        self.values[(section, key)] = value

    def psd_specs(self, default_band=(1.0, 10.0)) -> tuple[PsdSpec, PsdSpec]:
        """Per-user spreading-band specs.

        Explicit psd_* keys give both users the same band; otherwise each
        user gets a flat band on ``default_band`` tuned to its correction
        factor (zero density when m = 1).
        """
        if ("chaos", "psd_density") in self.values:
            spec = PsdSpec.flat_band(
                float(self.require("chaos", "psd_omega_low")),
                float(self.require("chaos", "psd_omega_high")),
                float(self.require("chaos", "psd_density")),
            )
            return spec, spec
        lo, hi = default_band
        m1, m2 = self._correction_factors()
        return (
            PsdSpec.flat_band(lo, hi, flat_band_density_for(m1, lo, hi)),
            PsdSpec.flat_band(lo, hi, flat_band_density_for(m2, lo, hi)),
        )

    def to_params(self, distance_km: float | None = None) -> QcdmaParams:
        """Build scenario parameters, optionally overriding the distance."""
        try:
            return self._build_params(distance_km)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{self.source}: {exc}") from exc

    def _build_params(self, distance_km: float | None) -> QcdmaParams:
        user1 = UserParams(
            v_s=float(self.require("user1", "v_s")),
            v_0=float(self.get("user1", "v_0", 1.0)),
        )
        user2 = UserParams(
            v_s=float(self.require("user2", "v_s")),
            v_0=float(self.get("user2", "v_0", 1.0)),
        )
        eta = self.get("channel", "eta")
        alpha = self.get("channel", "alpha_db_per_km")
        dist = self.get("channel", "distance_km")
        if eta is None and (alpha is None or dist is None):
            raise ConfigError(
                f"{self.source}: section [channel] needs either eta or both "
                "alpha_db_per_km and distance_km"
            )
        if distance_km is not None:
            if alpha is None:
                raise ConfigError(
                    f"{self.source}: distance override requires alpha_db_per_km"
                )
            eta = None
            dist = distance_km
        channel = ChannelParams(
            alpha_db_per_km=float(alpha if alpha is not None else 0.0),
            distance_km=float(dist if dist is not None else 0.0),
            eta=None if eta is None else float(eta),
            w=float(self.get("channel", "w", 1.0)),
            sigma=float(self.get("channel", "sigma", 1.0)),
        )

        m1, m2 = self._correction_factors()
        gamma_rule = str(self.get("model", "gamma_rule", "interferer"))
        if gamma_rule not in GAMMA_RULES:
            raise ConfigError(f"{self.source}: unknown gamma_rule '{gamma_rule}'")
        psi_mode = str(self.get("model", "psi_mode", "paper_literal"))
        xi_mode = str(self.get("model", "xi_mode", "paper_literal"))
        if psi_mode not in PSI_MODES:
            raise ConfigError(f"{self.source}: unknown psi_mode '{psi_mode}'")
        if xi_mode not in XI_MODES:
            raise ConfigError(f"{self.source}: unknown xi_mode '{xi_mode}'")
        gamma = self.get("model", "gamma")
        gamma0 = self.get("model", "gamma0")
        return QcdmaParams(
            user1=user1,
            user2=user2,
            channel=channel,
            m1=m1,
            m2=m2,
            gamma_rule=gamma_rule,
            gamma=None if gamma is None else float(gamma),
            gamma0=None if gamma0 is None else float(gamma0),
            beta=float(self.get("model", "beta", 1.0)),
            psi_mode=psi_mode,
            xi_mode=xi_mode,
        )

    def _correction_factors(self) -> tuple[float, float]:
        has_m = ("chaos", "m1") in self.values or ("chaos", "m2") in self.values
        has_psd = any(("chaos", k) in self.values
                      for k in ("psd_omega_low", "psd_omega_high", "psd_density"))
        if has_m and has_psd:
            raise ConfigError(
                f"{self.source}: give either m1/m2 or psd_* keys in [chaos], not both"
            )
        if has_psd:
            spec = PsdSpec.flat_band(
                float(self.require("chaos", "psd_omega_low")),
                float(self.require("chaos", "psd_omega_high")),
                float(self.require("chaos", "psd_density")),
            )
            m = correction_factor_from_psd(spec).m
            return m, m
        m1 = float(self.get("chaos", "m1", 1.0))
        m2 = float(self.get("chaos", "m2", 1.0))
        return m1, m2


def _parse_number(raw: str, source: str, lineno: int, key: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(
            f"{source}:{lineno}: value for '{key}' is not a number: {raw!r}"
        ) from None
    if not math.isfinite(value):
        raise ConfigError(f"{source}:{lineno}: value for '{key}' must be finite")
    return value


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse configuration text, rejecting unknown keys with line numbers."""
    values: dict[tuple[str, str], float | str] = {}
    section: str | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key outside of any [section]")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"{source}:{lineno}: unknown key '{key}' in section [{section}]"
            )
        if (section, key) in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{section}.{key}'")
        if (section, key) in _STRING_KEYS:
            values[(section, key)] = raw_value
        else:
            values[(section, key)] = _parse_number(raw_value, source, lineno, key)

    cfg = RunConfig(values=values, source=source)
    if ("channel", "eta") in values and (
        ("channel", "alpha_db_per_km") in values or ("channel", "distance_km") in values
    ):
        cfg.warnings.append(
            "both eta and alpha/distance supplied; eta takes precedence"
        )
    return cfg


def load_config(path) -> RunConfig:
    """Read and parse a configuration file."""
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))
