from .utils import FineredConfig, find_finered_json, get_config, set_config

from .errors import (
    FineredError, ComparisonModelViolation,
    BadParams, ParseError, ValidationFailed,
    NotTripartite, ParallelEdges, ShapeMismatch,
    OracleProtocol, RetryBudgetExhausted,
    UnknownPipeline, MissingLedger
)

from .ledger import Ledger, LedgerRow, current_ledger, local_ledger, accounted

from .numeric import (
    Ordering, RestrictedReal, INF, ZERO, real,
    compare3, compare4, tattling
)

from .instances import (
    ThreeSumInstance, MinPlusInstance, WeightedDigraph,
    WeightedTripartiteGraph, OVInstance, SparseGraph,
    SparseBundle, ColoredSparseGraph, EdgeColoredMultigraph,
    ColorfulBmmInstance, TriCoInstance, SetDisjointnessInstance,
    StringPair, validate, serialize, deserialize, load_instance
)

from .generate import generate, generator_kinds

from .pipelines import PipelineParams, get_pipeline, pipeline_ids, run
