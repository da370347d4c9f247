"""Numerical engine for competitive brand-awareness games on social networks.

Subpackages cover the influence network and awareness dynamics
(``network``), contest success functions and their welfare-alignment
audit (``csf``), the budget game with best-response dynamics (``game``),
p-mean welfare and Price of Anarchy (``welfare``), synthetic data
generation (``synthgen``), influence estimation and adoption prediction
(``estimate``), and seeded batch experiments (``experiments``).

Hot kernels run in a compiled extension when available; set
AWARENET_BACKEND=pure to force the numpy fallback.  ``awarenet.BACKEND``
names the active one.
"""

from ._backend import BACKEND
from .csf import AssumptionReport, CsfSpec, check_assumptions, csf_eval, make_csf
from .game import (
    BrdTrace,
    BudgetProfile,
    GameConfig,
    NashCheck,
    SmoothnessEstimate,
    brd_run,
    estimate_smoothness,
    grid_best_response_equilibrium,
    hessian_blocks,
    project_capped_simplex,
    utility,
    utility_gradient,
    verify_nash,
)
from .network import (
    AwarenessTrajectory,
    CentralityVector,
    InfluenceNetwork,
    NetworkFormatError,
    awareness_limit,
    awareness_simulate,
    awareness_simulate_final,
    compute_centrality,
    load_network,
    load_network_csv,
    save_network,
)
from .welfare import (
    PoaResult,
    WelfareResult,
    WelfareSpec,
    price_of_anarchy,
    welfare,
    welfare_optimize,
    welfare_ratio_curve,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "AssumptionReport",
    "AwarenessTrajectory",
    "BrdTrace",
    "BudgetProfile",
    "CentralityVector",
    "CsfSpec",
    "GameConfig",
    "InfluenceNetwork",
    "NashCheck",
    "NetworkFormatError",
    "PoaResult",
    "SmoothnessEstimate",
    "WelfareResult",
    "WelfareSpec",
    "awareness_limit",
    "awareness_simulate",
    "awareness_simulate_final",
    "brd_run",
    "check_assumptions",
    "compute_centrality",
    "csf_eval",
    "estimate_smoothness",
    "grid_best_response_equilibrium",
    "hessian_blocks",
    "load_network",
    "load_network_csv",
    "make_csf",
    "price_of_anarchy",
    "project_capped_simplex",
    "save_network",
    "utility",
    "utility_gradient",
    "verify_nash",
    "welfare",
    "welfare_optimize",
    "welfare_ratio_curve",
]
