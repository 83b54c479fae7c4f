"""Sample-level phase-space simulation of the two-user link.

Gaussian states have positive Wigner functions, so classical sampling of
quadratures reproduces every second moment of the link exactly; the
batches here are the ground-truth oracle for the analytic pipeline in
:mod:`qcdma.network`.

Two fidelities:

* ``averaged``: the receiver combines modes with the fixed
  amplitude-averaged coefficients (each spread/despread phase factor
  replaced by sqrt(M)).  This is the model behind the closed-form
  variances and matches them by construction.
* ``explicit``: every sample draws fresh spreading phases from their
  stationary distributions and pushes (X, Y) pairs through the full
  rotation/beamsplitter chain.  Statistics of this model quantify what
  amplitude averaging discards (receiver variances lose their M factors,
  and the interferer's phase cancels out of Eve's cross-covariances).

Phases are sampled from the stationary Gaussian distribution
N(0, -ln M) rather than by integrating long trajectories; for second
moments the two are equivalent and the former is orders of magnitude
cheaper.  Trajectory-level behaviour is validated separately in
:mod:`qcdma.chaos`.

Batches are generated in fixed-size chunks with per-chunk derived seeds,
so a batch is bit-reproducible from (seed, n, model) alone and chunks
could be evaluated in parallel without changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chaos import PsdSpec, correction_factor_from_psd
from .network import CrossCovariances, QcdmaParams

__all__ = [
    "SampleBatch",
    "EmpiricalStats",
    "simulate_averaged",
    "simulate_explicit_phase",
    "empirical_stats",
    "full_rotation_bob_variance",
    "full_rotation_conditional_variance",
    "full_rotation_mutual_information",
    "full_rotation_cross_covariances",
]

_CHUNK = 1 << 16
_MIN_SAMPLES = 10_000
_BOOT_KEY = (0xB00757A7,)


@dataclass(frozen=True)
class SampleBatch:
    """Per-sample quadratures of all link modes plus derived outcomes.

    Modulation components (``x_s*``, ``y_s*``) are stored separately from
    the full source quadratures so conditional statistics can regress on
    the symbols the senders actually know.  ``x_i1``/``x_i2`` are the
    interference quadratures seen by each user; under the interferer
    gamma rule they alias the other user's source arrays.
    """

    model: str
    n: int
    seed: int
    x_s1: np.ndarray
    y_s1: np.ndarray
    x_a1: np.ndarray
    y_a1: np.ndarray
    x_s2: np.ndarray
    y_s2: np.ndarray
    x_a2: np.ndarray
    y_a2: np.ndarray
    x_n: np.ndarray
    y_n: np.ndarray
    x_n_prime: np.ndarray
    y_n_prime: np.ndarray
    x_bs: np.ndarray
    y_bs: np.ndarray
    x_i1: np.ndarray
    y_i1: np.ndarray
    x_i1_mod: np.ndarray
    x_i2: np.ndarray
    y_i2: np.ndarray
    x_i2_mod: np.ndarray
    x_b1: np.ndarray
    x_b2: np.ndarray
    x_8: np.ndarray
    theta1: np.ndarray | None = None
    theta2: np.ndarray | None = None


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _chunk_sizes(n: int) -> list[int]:
    sizes = [_CHUNK] * (n // _CHUNK)
    if n % _CHUNK:
        sizes.append(n % _CHUNK)
    return sizes


def _epr_pair(rng: np.random.Generator, w: float, size: int):
    """(X, X', Y, Y') with X correlated and Y anti-correlated at sqrt(W^2-1)."""
    c = math.sqrt(w * w - 1.0)
    g1 = rng.standard_normal(size)
    g2 = rng.standard_normal(size)
    h1 = rng.standard_normal(size)
    h2 = rng.standard_normal(size)
    sw = math.sqrt(w)
    x_n = sw * g1
    x_np = (c / sw) * g1 + g2 / sw
    y_n = sw * h1
    y_np = -(c / sw) * h1 + h2 / sw
    return x_n, x_np, y_n, y_np


def _draw_modes(rng: np.random.Generator, p: QcdmaParams, size: int) -> dict:
    """Source, ancilla, environment and interference draws for one chunk.

    The draw order is part of the determinism contract; do not reorder.
    """
    d: dict[str, np.ndarray] = {}
    for idx, user in ((1, p.user1), (2, p.user2)):
        d[f"x_s{idx}"] = rng.normal(0.0, math.sqrt(user.v_s), size)
        d[f"y_s{idx}"] = rng.normal(0.0, math.sqrt(user.v_s), size)
        d[f"x_a{idx}"] = d[f"x_s{idx}"] + rng.normal(0.0, math.sqrt(user.v_0), size)
        d[f"y_a{idx}"] = d[f"y_s{idx}"] + rng.normal(0.0, math.sqrt(user.v_0), size)
    d["x_n"], d["x_n_prime"], d["y_n"], d["y_n_prime"] = _epr_pair(
        rng, p.channel.w, size
    )
    d["x_bs"] = rng.normal(0.0, math.sqrt(p.channel.sigma), size)
    d["y_bs"] = rng.normal(0.0, math.sqrt(p.channel.sigma), size)
    if p.gamma_rule == "interferer":
        d["x_i1"], d["y_i1"], d["x_i1_mod"] = d["x_a2"], d["y_a2"], d["x_s2"]
        d["x_i2"], d["y_i2"], d["x_i2_mod"] = d["x_a1"], d["y_a1"], d["x_s1"]
    else:
        gamma, gamma0 = float(p.gamma), float(p.gamma0)
        for idx in (1, 2):
            mod = rng.normal(0.0, math.sqrt(gamma - gamma0), size)
            d[f"x_i{idx}"] = mod + rng.normal(0.0, math.sqrt(gamma0), size)
            d[f"y_i{idx}"] = rng.normal(0.0, math.sqrt(gamma), size)
            d[f"x_i{idx}_mod"] = mod
    return d


def _assemble(model: str, n: int, seed: int, chunks: list[dict]) -> SampleBatch:
    merged = {
        key: np.concatenate([c[key] for c in chunks]) for key in chunks[0]
    }
    return SampleBatch(model=model, n=n, seed=seed, **merged)


def simulate_averaged(p: QcdmaParams, n: int, seed: int) -> SampleBatch:
    """Draw a batch under the amplitude-averaged receiver combination."""
    if n < _MIN_SAMPLES:
        raise ValueError(f"need at least {_MIN_SAMPLES} samples, got {n}")
    eta = p.channel.eta_value
    c_sig = math.sqrt(eta) / 2.0
    c_int = math.sqrt(p.m1 * p.m2 * eta) / 2.0
    chunks = []
    for chunk_idx, size in enumerate(_chunk_sizes(n)):
        rng = _chunk_rng(seed, chunk_idx)
        d = _draw_modes(rng, p, size)
        for idx, sign in ((1, +1.0), (2, -1.0)):
            m_u = p.m_for(idx)
            d[f"x_b{idx}"] = (
                c_sig * d[f"x_a{idx}"]
                + math.sqrt(m_u * (1.0 - eta) / 2.0) * d["x_n"]
                + c_int * d[f"x_i{idx}"]
                + sign * math.sqrt(m_u / 2.0) * d["x_bs"]
            )
        d["x_8"] = (
            math.sqrt(eta) * d["x_n"]
            - math.sqrt(p.m1 * (1.0 - eta) / 2.0) * d["x_a1"]
            - math.sqrt(p.m2 * (1.0 - eta) / 2.0) * d["x_i1"]
        )
        chunks.append(d)
    return _assemble("averaged", n, seed, chunks)


def _rotate_minus(x, y, theta):
    # quadratures of a * exp(-i theta)
    c, s = np.cos(theta), np.sin(theta)
    return x * c + y * s, y * c - x * s


def _rotate_plus(x, y, theta):
    c, s = np.cos(theta), np.sin(theta)
    return x * c - y * s, y * c + x * s


def simulate_explicit_phase(
    p: QcdmaParams, psd1: PsdSpec, psd2: PsdSpec, n: int, seed: int
) -> SampleBatch:
    """Draw a batch with per-sample spreading phases and full rotations.

    The phase variances come from the band densities; the resulting
    correction factors must match ``p.m1`` / ``p.m2`` within 5% or the
    scenario is inconsistent and a ValueError is raised.  Interference is
    always the other user's physical mode here regardless of the gamma
    rule (the rotation chain has no separate interference input).
    """
    if n < _MIN_SAMPLES:
        raise ValueError(f"need at least {_MIN_SAMPLES} samples, got {n}")
    m_psd = (correction_factor_from_psd(psd1).m, correction_factor_from_psd(psd2).m)
    for m_spec, m_param, label in ((m_psd[0], p.m1, "m1"), (m_psd[1], p.m2, "m2")):
        if abs(m_spec - m_param) > 0.05 * m_param:
            raise ValueError(
                f"correction-factor mismatch for {label}: band density gives "
                f"{m_spec:.6g}, parameters say {m_param:.6g}"
            )
    eta = p.channel.eta_value
    sq_eta, sq_loss = math.sqrt(eta), math.sqrt(1.0 - eta)
    std1 = math.sqrt(-math.log(m_psd[0])) if m_psd[0] < 1.0 else 0.0
    std2 = math.sqrt(-math.log(m_psd[1])) if m_psd[1] < 1.0 else 0.0
    chunks = []
    for chunk_idx, size in enumerate(_chunk_sizes(n)):
        rng = _chunk_rng(seed, chunk_idx)
        d = _draw_modes(rng, p, size)
        th1 = rng.normal(0.0, std1, size)
        th2 = rng.normal(0.0, std2, size)
        x1p, y1p = _rotate_minus(d["x_a1"], d["y_a1"], th1)
        x2p, y2p = _rotate_minus(d["x_a2"], d["y_a2"], th2)
        x5 = (x1p + x2p) / math.sqrt(2.0)
        y5 = (y1p + y2p) / math.sqrt(2.0)
        x7 = sq_eta * x5 + sq_loss * d["x_n"]
        y7 = sq_eta * y5 + sq_loss * d["y_n"]
        d["x_8"] = sq_eta * d["x_n"] - sq_loss * x5
        x3p = (x7 + d["x_bs"]) / math.sqrt(2.0)
        y3p = (y7 + d["y_bs"]) / math.sqrt(2.0)
        x4p = (x7 - d["x_bs"]) / math.sqrt(2.0)
        y4p = (y7 - d["y_bs"]) / math.sqrt(2.0)
        d["x_b1"], _ = _rotate_plus(x3p, y3p, th1)
        d["x_b2"], _ = _rotate_plus(x4p, y4p, th2)
        d["theta1"] = th1
        d["theta2"] = th2
        # physical interference is the other user's mode
        d["x_i1"], d["y_i1"], d["x_i1_mod"] = d["x_a2"], d["y_a2"], d["x_s2"]
        d["x_i2"], d["y_i2"], d["x_i2_mod"] = d["x_a1"], d["y_a1"], d["x_s1"]
        chunks.append(d)
    return _assemble("explicit", n, seed, chunks)


def full_rotation_bob_variance(p: QcdmaParams, user: int) -> float:
    """Receiver variance of the explicit-phase model.

    Rotating a circularly symmetric Gaussian mode leaves its quadrature
    variance unchanged, so no spreading factor survives:
    (eta/4)(V_A + V_A_other) + (1-eta)/2 * W + sigma/2.
    """
    eta = p.channel.eta_value
    other = p.user(2 if user == 1 else 1)
    return (
        eta / 4.0 * (p.user(user).v_a + other.v_a)
        + (1.0 - eta) / 2.0 * p.channel.w
        + p.channel.sigma / 2.0
    )


def full_rotation_conditional_variance(p: QcdmaParams, user: int) -> float:
    """Explicit-model receiver variance after linear regression on all
    modulation symbols.

    The despread direct term keeps its full coefficient, the interferer
    term survives only through the mean cross-phase sqrt(M_u M_j), so the
    regression removes (eta/4)(V_S + M1 M2 V_S_other).
    """
    eta = p.channel.eta_value
    other = p.user(2 if user == 1 else 1)
    removed = eta / 4.0 * (p.user(user).v_s + p.m1 * p.m2 * other.v_s)
    return full_rotation_bob_variance(p, user) - removed


def full_rotation_mutual_information(p: QcdmaParams, user: int) -> float:
    return 0.5 * math.log2(
        full_rotation_bob_variance(p, user)
        / full_rotation_conditional_variance(p, user)
    )


def full_rotation_cross_covariances(p: QcdmaParams, user: int) -> CrossCovariances:
    """Eve cross-covariances of the explicit-phase model.

    The interferer's spreading phase appears once with each sign between
    Eve's tap and the despread receiver and cancels identically, so every
    term carries only sqrt(M_u):

        xi  = sqrt(2 M_u eta (1-eta)) * (W/2 - V_A/4 - V_A_other/4)
        psi = sqrt(M_u (1-eta)/2) * sqrt(W^2 - 1)

    psi coincides with the derived analytic mode; xi does not coincide
    with either analytic mode unless the other user's factor is 1.
    """
    eta = p.channel.eta_value
    w = p.channel.w
    m_u = p.m_for(user)
    other = p.user(2 if user == 1 else 1)
    root = math.sqrt(2.0 * m_u * eta * (1.0 - eta))
    xi = 0.5 * root * w - 0.25 * root * p.user(user).v_a - 0.25 * root * other.v_a
    psi = math.sqrt(m_u * (1.0 - eta) / 2.0) * math.sqrt(w * w - 1.0)
    return CrossCovariances(xi=xi, psi=psi)


@dataclass(frozen=True)
class EmpiricalStats:
    """Statistics of a batch with bootstrap standard errors.

    ``stats`` maps a statistic name to (value, std_err).  Statistics that
    cannot be formed because a variance vanished are listed in
    ``degenerate`` instead of raising.
    """

    n: int
    seed: int
    model: str
    stats: dict[str, tuple[float, float]]
    degenerate: tuple[str, ...] = field(default=())

    def value(self, name: str) -> float:
        return self.stats[name][0]

    def std_err(self, name: str) -> float:
        return self.stats[name][1]

    def to_csv(self, path) -> None:
        """Write rows (statistic, value, std_err)."""
        with open(path, "w", newline="") as fh:
            fh.write("statistic,value,std_err\n")
            for name, (value, err) in self.stats.items():
                fh.write(f"{name},{value!r},{err!r}\n")


def _residual_variance(x_b: np.ndarray, design: np.ndarray) -> float:
    """Variance of x_b after removing the best linear fit on the symbols."""
    centered = x_b - x_b.mean()
    cols = design - design.mean(axis=0)
    coef, _res, rank, _sv = np.linalg.lstsq(cols, centered, rcond=None)
    resid = centered - cols @ coef
    ddof = 1 + int(rank)
    return float(resid @ resid / (resid.size - ddof))


def _features(b: SampleBatch) -> dict[str, np.ndarray]:
    feats = {
        "x_b1": b.x_b1,
        "x_b2": b.x_b2,
        "design": np.column_stack([b.x_s1, b.y_s1, b.x_s2, b.y_s2]),
        "x_8": b.x_8,
        "x_np": b.x_n_prime,
    }
    if b.theta1 is not None:
        feats["z1"] = np.exp(1j * b.theta1)
        feats["z2"] = np.exp(1j * b.theta2)
    return feats


def _stats_from(
    feats: dict[str, np.ndarray], idx: np.ndarray | None
) -> tuple[dict[str, float], list[str]]:
    def col(name: str) -> np.ndarray:
        a = feats[name]
        return a if idx is None else a[idx]

    design = col("design")
    x_8 = col("x_8")
    x_np = col("x_np")
    out: dict[str, float] = {}
    degenerate: list[str] = []
    for u in (1, 2):
        xb = col(f"x_b{u}")
        var = float(xb.var(ddof=1))
        out[f"var_x_b{u}"] = var
        if var < 1e-12:
            degenerate.extend([f"cond_var_x_b{u}", f"mi_{u}"])
            out[f"cond_var_x_b{u}"] = 0.0
            out[f"mi_{u}"] = 0.0
        else:
            cond = _residual_variance(xb, design)
            out[f"cond_var_x_b{u}"] = cond
            out[f"mi_{u}"] = 0.5 * math.log2(var / cond)
        xbc = xb - xb.mean()
        out[f"cov_x8_x_b{u}"] = float((x_8 - x_8.mean()) @ xbc / (xb.size - 1))
        out[f"cov_xn_prime_x_b{u}"] = float(
            (x_np - x_np.mean()) @ xbc / (xb.size - 1)
        )
    if "z1" in feats:
        out["phase_factor_1"] = float(abs(col("z1").mean()))
        out["phase_factor_2"] = float(abs(col("z2").mean()))
    return out, degenerate


def empirical_stats(batch: SampleBatch, bootstrap: int = 200) -> EmpiricalStats:
    """Variances, cross-covariances and plug-in mutual information.

    Conditional variances regress the receiver outcome on all modulation
    symbols (both users, both quadratures); the plug-in MI is
    0.5*log2(var/residual var).  Standard errors come from ``bootstrap``
    index resamples driven by a seed derived from the batch seed, so the
    whole report is reproducible.
    """
    feats = _features(batch)
    values, degenerate = _stats_from(feats, None)
    rng = np.random.default_rng(
        np.random.SeedSequence(batch.seed, spawn_key=_BOOT_KEY)
    )
    samples: dict[str, list[float]] = {k: [] for k in values}
    for _ in range(bootstrap):
        idx = rng.integers(0, batch.n, batch.n)
        resampled, _deg = _stats_from(feats, idx)
        for k, v in resampled.items():
            samples[k].append(v)
    stats = {
        k: (values[k], float(np.std(samples[k], ddof=1))) for k in values
    }
    return EmpiricalStats(
        n=batch.n,
        seed=batch.seed,
        model=batch.model,
        stats=stats,
        degenerate=tuple(degenerate),
    )
