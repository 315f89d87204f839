"""Linear-optical mode-transformer simulation and contextuality verification."""
from ._kernels import BACKEND as KERNEL_BACKEND
from .context_verifier import (
    ContextPair,
    VerificationReport,
    linearity_check,
    relabel_network,
    verify_relabel_equivalence,
    verify_shared_observable,
)
from .contextuality_oracle import (
    CompatibilityGraph,
    InequalityExpression,
    InequalityReport,
    RaySet,
    classical_bound_bruteforce,
    evaluate_inequality,
    load_bundled_inequality,
    orthogonality_graph,
    quantum_value,
    state_independence_scan,
)
from .mode_calculus import (
    AmplitudeVector,
    ModeBasis,
    ModeLabel,
    Polarization,
    UnitaryMap,
    apply,
    compose,
    permutation_map,
)
from .observable_extraction import (
    DetectorModel,
    LeakageError,
    Observable,
    Projector,
    commutes,
    detection_probability,
    extract_projector,
    to_observable,
)
from .optical_elements import (
    HWP,
    PBS,
    NetworkSpec,
    Relabel,
    element_to_unitary,
    hwp_matrix,
    network_unitary,
    pbs_matrix,
)

__version__ = "0.1.0"
