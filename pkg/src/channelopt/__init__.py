"""Payment-channel network design toolkit.

Exact-arithmetic building blocks for deciding which transactions a channel
operator should execute, which channels to open, how much capital to lock
on each side, and how the online variant of the provisioning problem
behaves.
"""

from .errors import (
    CardinalityZero,
    ChannelOptError,
    DisconnectedEndpoints,
    InfeasibleRepair,
    InstanceTooLarge,
    InsufficientCapital,
    MissingChannel,
    NotAnEndpoint,
    UnknownFixture,
)
from .model import (
    ChannelNetwork,
    ChannelState,
    ProfitValue,
    Routing,
    Strategy,
    Transaction,
    ValidationReport,
    apply_transfer,
    locked_capital,
    route_path,
    total_capital,
    validate_solution,
)
from .preprocess import PruneReport, classify_profitable, prune_single_participation
from .single_channel import (
    FwssInstance,
    SignedTxSequence,
    decide_profit,
    exact_select,
    fptas_select,
    fptas_select_report,
    fwss_brute,
    fwss_reduce,
)
from .design import (
    DesignResult,
    TokenLedger,
    assign_capital_tree,
    best_star,
    build_max_profit_forest,
    build_star,
    exact_min_capital,
)
from .restricted import (
    PartitionInstance,
    RestrictedInstance,
    feasible_routing,
    partition_brute,
    partition_reduce,
)
from .online import (
    AdversaryTranscript,
    CompetitiveReport,
    OnlineStarState,
    adversary_stream,
    competitive_report,
    online_step,
    run_online,
    run_online_report,
)

__version__ = "0.1.0"
