from .backends import (
    BackendError,
    BackendResult,
    BuiltinMipBackend,
    BuiltinSatBackend,
    CommandBackend,
    ModelParseError,
    RecordingBackend,
    ReplayBackend,
    SolverBackend,
    backend_from_spec,
    parse_model,
    read_dimacs,
)
from .sat import SatResult, SolverTimeout, check_model, solve_cnf
from .search import (
    SearchError,
    SearchReport,
    SizeRecord,
    brute_force_minimal,
    feasible_sizes,
    minimal_search,
    solve_instance,
)

__all__ = [
    "BackendError", "BackendResult", "BuiltinMipBackend", "BuiltinSatBackend", "CommandBackend",
    "ModelParseError", "RecordingBackend", "ReplayBackend", "SatResult", "SearchError", "SearchReport",
    "SizeRecord", "SolverBackend", "SolverTimeout", "backend_from_spec", "brute_force_minimal",
    "check_model", "feasible_sizes", "minimal_search", "parse_model", "read_dimacs", "solve_cnf",
    "solve_instance",
]
