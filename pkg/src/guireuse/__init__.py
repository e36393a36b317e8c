"""GUI test reuse: match, execute, deduplicate and adapt tests across apps."""

from .config import (
    AdaptationConfig,
    ExplorerConfig,
    MatcherConfig,
    OracleConfig,
    RunConfig,
    load_config,
)
from .engine import (
    IndexSets,
    MatchedTest,
    MatchPair,
    ORACLE_FAIL,
    ORACLE_PASS,
    adapt,
    deduplicate,
    generate_initial_test,
    make_session,
    run_pipeline,
    select_rematch_indexes,
)
from .errors import (
    ConfigError,
    GuiReuseError,
    ParseError,
    SimulationError,
    ValidationError,
)
from .evaluation import (
    GroundTruth,
    Metrics,
    Suite,
    compute_metrics,
    load_ground_truth,
    load_suite,
    run_suite,
)
from .explorer import PathCache, ProbeStats, find_paths, resolve_reachable, verified_paths
from .lexicon import (
    AbbreviationMap,
    DEFAULT_ABBREVIATIONS,
    EmbeddingTable,
    attribute_similarity,
    load_embeddings,
    tokenize,
    word_similarity,
)
from .matcher import Candidate, rank_candidates, rank_model_candidates, widget_similarity
from .model import (
    AppModel,
    Event,
    Screen,
    TestCase,
    Widget,
    Wtg,
    WtgEdge,
    load_app_model,
    load_test,
    read_app_model,
    read_test,
)
from .simulator import ConcreteEvent, OracleContext, Session, TransitionOutcome

__version__ = "0.1.0"

__all__ = [
    "AbbreviationMap",
    "AdaptationConfig",
    "AppModel",
    "Candidate",
    "ConcreteEvent",
    "ConfigError",
    "DEFAULT_ABBREVIATIONS",
    "EmbeddingTable",
    "Event",
    "ExplorerConfig",
    "GroundTruth",
    "GuiReuseError",
    "IndexSets",
    "MatchPair",
    "MatchedTest",
    "MatcherConfig",
    "Metrics",
    "ORACLE_FAIL",
    "ORACLE_PASS",
    "OracleConfig",
    "OracleContext",
    "ParseError",
    "PathCache",
    "ProbeStats",
    "RunConfig",
    "Screen",
    "Session",
    "SimulationError",
    "Suite",
    "TestCase",
    "TransitionOutcome",
    "ValidationError",
    "Widget",
    "Wtg",
    "WtgEdge",
    "adapt",
    "attribute_similarity",
    "compute_metrics",
    "deduplicate",
    "find_paths",
    "generate_initial_test",
    "load_app_model",
    "load_config",
    "load_embeddings",
    "load_ground_truth",
    "load_suite",
    "load_test",
    "make_session",
    "rank_candidates",
    "rank_model_candidates",
    "read_app_model",
    "read_test",
    "resolve_reachable",
    "run_pipeline",
    "run_suite",
    "select_rematch_indexes",
    "tokenize",
    "verified_paths",
    "widget_similarity",
    "word_similarity",
]
