"""Memory-decay profiles, class norms and certified inverse-decay bounds for matrices."""

__version__ = "0.1.0"

from .operator_core import (  # noqa: E402
    DiagonalProfile,
    MultiplierMap,
    NormMode,
    Topology,
    apply_multiplier,
    beurling_spectrum,
    commutator_with_position,
    condition_number,
    diagonal_profile,
    direct_inverse,
    extract_diagonal,
    operator_norm,
)
from .windows import (  # noqa: E402
    EtaParams,
    TriangleWindow,
    eta_fourier_coeff,
    eta_value,
    exp_multiplier,
    hat_value,
    window_multiplier,
)
from .class_norms import (  # noqa: E402
    beurling_norm,
    causal_split,
    classify_decay,
    exp_decay_fit,
    integral_wiener_norm,
    sobolev_wiener_norm,
    vector_wiener_norm,
    wiener_norm,
    windowed_piece,
)
from .decay_bounds import (  # noqa: E402
    alpha_domain,
    banded_inverse_bound,
    banded_inverse_certificate,
    one_sided_window_bound,
    psi_A,
    wiener_inverse_certificate,
)
from .inverse_engine import band_split, neumann_inverse, spectral_radius_sequence  # noqa: E402
from .generators import DeterministicRng, GeneratorSpec, generate, symbol_inverse_coefficients  # noqa: E402
