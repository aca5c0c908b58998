"""MBVD acoustic resonator models, ladder filter synthesis and fitting."""

from .exceptions import (
    BoundaryExtremumError,
    InitializationError,
    InputError,
    MbvdError,
    MetricsError,
    ParseError,
    SingularNetworkError,
    SynthesisError,
)
from .fitting import FitOptions, FitResult, MbvdRegressor, fit_mbvd, init_guess
from .ladder import (
    FilterMetrics,
    LadderDesign,
    MatchResult,
    SynthesisResult,
    build_ladder,
    extract_metrics,
    find_complex_match,
    optimize_static_caps,
    simulate,
)
from .mbvd import (
    MbvdParams,
    ResonatorMetrics,
    ResonatorSpec,
    admittance,
    em_resonance_freq,
    fp_from_k2,
    k2_from_freqs,
    mbvd_from_spec,
    resonance_extrema,
    resonator_metrics,
)
from .network import (
    FrequencySweep,
    abcd_to_s,
    cascade,
    renormalize_sweep,
    s_to_abcd,
    series_abcd,
    shunt_abcd,
    transducer_gain,
)
from .optimize import nelder_mead

__version__ = "0.1.0"
