"""Single-photon pulse shaping through finite-level open quantum systems.

Model a plant as a scattering matrix, a scalar-profile coupling vector and
a Hamiltonian; verify the algebraic conditions under which it responds
linearly to a single-photon input; and shape pulses through the resulting
one-pole transfer filters, including series composition and coherent
feedback reduction.
"""

__version__ = "0.1.0"

from .operators import (
    EigenRelationReport,
    Operator,
    commutator,
    embed_site,
    ground_state,
    identity,
    row_proportionality_test,
    sigma_minus,
    sigma_plus,
    sigma_z,
    vector_eigen_test,
    zero,
)
from .model import (
    ConditionReport,
    DerivedParams,
    ModelValidationError,
    SingularLoopError,
    SLHModel,
    ValidationReport,
    feedback_reduce,
    feedback_shift,
    identity_system,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    series_product,
    validate_model,
)
from .transfer import (
    FilterStage,
    FrequencyResponse,
    PhotonTransfer,
    cascade,
    frequency_response,
    from_model,
    identity_filter,
    impulse_response,
)
from .pulses import (
    GridSpanError,
    Pulse,
    PulseSpec,
    PulseSpectrum,
    TimeGrid,
    decaying_exp_pulse,
    fourier,
    gaussian_pulse,
    inverse_fourier,
    normalize,
    read_pulse_csv,
    rising_exp_pulse,
    shape_fft,
    shape_ode,
    square_pulse,
    write_pulse_csv,
    write_spectrum_csv,
)
from .oracles import (
    TwoLevelParams,
    feedback_g,
    inverting_pulse,
    kummer_1f1,
    memory_g,
    memory_kernel,
    two_channel_g,
    two_level_g,
)

__all__ = [
    "__version__",
    # operators
    "Operator",
    "EigenRelationReport",
    "identity",
    "zero",
    "sigma_z",
    "sigma_plus",
    "sigma_minus",
    "ground_state",
    "commutator",
    "vector_eigen_test",
    "row_proportionality_test",
    "embed_site",
    # model
    "SLHModel",
    "DerivedParams",
    "ConditionReport",
    "ValidationReport",
    "ModelValidationError",
    "SingularLoopError",
    "validate_model",
    "series_product",
    "feedback_reduce",
    "feedback_shift",
    "identity_system",
    "model_to_dict",
    "model_from_dict",
    "load_model",
    "save_model",
    # transfer
    "FilterStage",
    "PhotonTransfer",
    "FrequencyResponse",
    "from_model",
    "identity_filter",
    "frequency_response",
    "cascade",
    "impulse_response",
    # pulses
    "TimeGrid",
    "Pulse",
    "PulseSpec",
    "PulseSpectrum",
    "GridSpanError",
    "gaussian_pulse",
    "decaying_exp_pulse",
    "rising_exp_pulse",
    "square_pulse",
    "normalize",
    "fourier",
    "inverse_fourier",
    "shape_fft",
    "shape_ode",
    "read_pulse_csv",
    "write_pulse_csv",
    "write_spectrum_csv",
    # oracles
    "TwoLevelParams",
    "two_level_g",
    "two_channel_g",
    "memory_g",
    "memory_kernel",
    "kummer_1f1",
    "inverting_pulse",
    "feedback_g",
]
