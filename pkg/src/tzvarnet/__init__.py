"""Sparse signed directed comovement networks from a time-zone-aware lasso VAR."""

__version__ = "0.1.0"

from .config import (
    CompareConfig,
    DataConfig,
    LassoConfig,
    OutputConfig,
    RollingConfig,
    RunConfig,
    SelectionConfig,
    load_config,
)
from .errors import ConfigError, DataError, EstimationError, TzvarnetError
from .lasso import (
    DesignMatrix,
    LambdaGrid,
    LassoFit,
    lambda_grid,
    lambda_max,
    lasso_fit,
    lasso_path,
)
from .markets import (
    AlignmentPolicy,
    Continent,
    Market,
    MarketSet,
    ReturnsPanel,
    align_panel,
    load_market_metadata,
    load_returns_csv,
    slice_period,
)
from .netmetrics import (
    Basis,
    ContinentFlow,
    NodeStrengths,
    SignClass,
    continent_assortativity,
    continent_flows,
    decompose,
    degree_assortativity,
    density,
    metrics_summary,
    node_strengths,
    quadrant_classify,
)
from .network import SignedNetwork
from .rolling import WindowPlan, rolling_flows, rolling_windows, window_seed
from .selection import (
    CVVariant,
    FoldPlan,
    LambdaSelection,
    NetworkEstimate,
    build_adjacency,
    build_network,
    build_weights,
    cv_select,
    partition_folds,
    repeated_cv,
    stability_diagnostics,
)
from .synth import (
    GroundTruth,
    RecoveryScore,
    random_tz_var,
    recovery_score,
    simulate_panel,
    synthetic_market_set,
)
from .tzvar import (
    CoefficientMatrix,
    LagStructure,
    ar_diagonal,
    build_design,
    estimate_equation,
    estimate_system,
    structure_from_name,
)
from .evalcmp import ComparisonRow, compare_structures, in_sample_r2
