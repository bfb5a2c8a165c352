"""Rule-based collective entity resolution with global object merges and
local value-cell merges, optimality criteria over solutions, and
optimality-recognition procedures."""

from .core import (
    Cell,
    Constant,
    Database,
    DomainError,
    EngineError,
    EquivRel,
    Fact,
    NULL,
    RelationDecl,
    Sort,
    eqrel_close,
    extend,
    obj,
    pair_count,
    tid,
    val,
)
from .metrics import GroundTruth, Scores, score
from .query import Query, SimilarityStore, eval_boolean, eval_query
from .semantics import (
    Candidate,
    Comparison,
    Criterion,
    CriterionSets,
    active_entries,
    compare,
    criterion_sets,
    is_candidate,
    is_solution,
)
from .similarity import SimConfig, build_sim_store, jaro_winkler, levenshtein, tfidf_cosine
from .solver import (
    RecognitionResult,
    SearchConfig,
    enumerate_solutions,
    optimal_solutions,
    recognize_optimal_bruteforce,
    recognize_optimal_restricted,
)
from .specdsl import Specification, parse_spec, print_spec, validate_rule_shapes

__version__ = "0.1.0"
