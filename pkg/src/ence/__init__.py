"""Detection and quantification of nonclassical correlation with EnCE maps."""

__version__ = "0.1.0"

from .errors import EnceError, InvalidStateError, NumericalError, ParameterError
from .linalg import Spectrum, eig_hermitian, kron, psd_sqrt, pseudo_power
from .maps import EnceMapSpec, MapKind, MappedState, Side, apply_ence, gamma_x, p_x, partial_transpose
from .measures import (
    DETECT_THRESHOLD,
    MeasureResult,
    WeightedMeasureSpec,
    measure_D,
    measure_Q,
    measure_Q_tilde,
    weighted_measure,
)
from .multipartite import (
    PEStatus,
    PEVerdict,
    SplittingSpec,
    aggregate_measure,
    enumerate_bipartitions,
    fully_product_check,
    pe_oracle_bipartite,
)
from .states import (
    DensityMatrix,
    NamedStateSpec,
    apply_local_unitary,
    make_1wcc,
    make_named_state,
    parse_state,
    partial_trace,
    random_density,
    random_pe_state,
    read_state,
    regroup,
    tensor,
    validate,
    write_state,
)
