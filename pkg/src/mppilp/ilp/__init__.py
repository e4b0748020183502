from .builders import (
    ModelContractError,
    add_compact_collision_constraints,
    assignment_to_flow,
    build_makespan_model,
    build_maxdist_model,
    build_totaldist_model,
    build_totaltime_model,
    flow_to_assignment,
)
from .model import (
    BINARY,
    EQ,
    GE,
    INTEGER,
    LE,
    MAXIMIZE,
    MINIMIZE,
    Constraint,
    IlpModel,
    LpFormatError,
    export_lp,
    parse_lp,
)

BUILDERS = {
    "makespan": build_makespan_model,
    "maxdist": build_maxdist_model,
    "totaltime": build_totaltime_model,
    "totaldist": build_totaldist_model,
}

__all__ = [
    "BINARY", "BUILDERS", "EQ", "GE", "INTEGER", "LE", "MAXIMIZE", "MINIMIZE", "Constraint",
    "IlpModel", "LpFormatError", "ModelContractError", "add_compact_collision_constraints",
    "assignment_to_flow", "build_makespan_model", "build_maxdist_model", "build_totaldist_model",
    "build_totaltime_model", "export_lp", "flow_to_assignment", "parse_lp",
]
