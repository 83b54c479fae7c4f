"""Two-user chaotic-spreading CV-QKD link.

Analytic secret key rates under a collective entangling-cloner attack,
chaotic phase-shifter spreading-code models, and sample-level Monte
Carlo validation of every closed form.
"""

from .chaos import (
    CorrectionFactor,
    EmpiricalCorrection,
    PhaseProcess,
    PsdSpec,
    correction_factor_from_psd,
    empirical_correction_factor,
    empirical_psd,
    flat_band_density_for,
    generate_phase_process,
)
from .config import ConfigError, RunConfig, load_config, parse_config
from .gaussian import (
    SymplecticSpectrum,
    TwoModeCovariance,
    g_entropy,
    homodyne_condition,
    symplectic_form,
    symplectic_spectrum,
    von_neumann_entropy,
)
from .montecarlo import (
    EmpiricalStats,
    SampleBatch,
    empirical_stats,
    simulate_averaged,
    simulate_explicit_phase,
)
from .network import (
    ChannelParams,
    CrossCovariances,
    QcdmaParams,
    SkrBreakdown,
    UserParams,
    UserRate,
    baseline_skr,
    bob_variance,
    build_eve_cm,
    conditional_variance,
    cross_covariances,
    eve_spectrum,
    holevo_bound,
    mutual_information,
    secret_key_rate,
    transmittance,
)

__version__ = "0.1.0"
