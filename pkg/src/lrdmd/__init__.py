"""Low-rank dynamic mode decomposition: exact rank-constrained fits,
sub-optimal reference estimators, spectral factorization and reduced models."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AlphaBracketFailure,
    CapExceeded,
    DefectiveOperator,
    GammaGridExhausted,
    InvalidInput,
    LrdmdError,
    NotConverged,
    NotDiagonalizable,
    NumericalFailure,
    ParseError,
    SpectralPairingError,
)
from .estimators import (  # noqa: E402
    AdmmConfig,
    FitReport,
    LowRankFactors,
    closed_form_error,
    compute_optimal_state,
    fit,
    fit_nuclear,
    fit_nuclear_target_rank,
    fit_optimal,
    fit_projected,
    fit_sparse,
    fit_tls,
    fit_truncated,
    residual_frobenius,
)
from .linalg import EconomySvd, dense_evd, economy_svd, pseudo_inverse, row_space_projector  # noqa: E402
from .rom import Trajectory, dense_reference, simulate, simulate_spectral  # noqa: E402
from .snapshots import (  # noqa: E402
    SnapshotPair,
    TrajectorySet,
    assemble_pair,
    load_snapshots,
    save_snapshots,
    simulate_linear_truth,
)
from .spectral import (  # noqa: E402
    RomParams,
    SpectralModel,
    dense_operator,
    evd_lowrank,
    rom_params_from_factors,
    rom_params_from_spectral,
)
