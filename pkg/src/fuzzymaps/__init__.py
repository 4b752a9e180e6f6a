"""Fuzzy cognitive and relational map models over partitioned matrices.

Build or load a connection-matrix model, seed some nodes, and iterate the
threshold dynamics until the hidden pattern (fixed point or limit cycle)
appears.  See the README for the file format and the command-line front end.
"""

from .supermatrix import (
    EntryDomain,
    Kind,
    MatrixKind,
    Orientation,
    Partition,
    SuperMatrix,
    SuperVector,
    check_entry_domain,
    classify,
    flatten,
    make_partition,
    partition_matrix,
    transpose_matrix,
    transpose_vector,
)
from .dynamics import (
    Attractor,
    AttractorCensus,
    Comparator,
    Direction,
    FirstStepMode,
    HiddenPattern,
    PatternKind,
    Side,
    StateVector,
    StepRecord,
    ThresholdPolicy,
    ThresholdRule,
    apply_threshold,
    apply_update,
    enumerate_attractors,
    run_hidden_pattern,
    special_product,
    step,
    sweep_unit_seeds,
)
from .models import (
    Diagnostic,
    ModelKind,
    ModelSpec,
    PolicyOverrides,
    describe,
    run_model,
    seed_from_labels,
    validate_model,
)
from .model_io import (
    FIXTURE_NAMES,
    RunReport,
    build_report,
    emit_dot,
    fixture_text,
    load_fixture,
    parse_model,
    report_to_text,
    serialize_model,
    serialize_report,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "EntryDomain",
    "Kind",
    "MatrixKind",
    "Orientation",
    "Partition",
    "SuperMatrix",
    "SuperVector",
    "check_entry_domain",
    "classify",
    "flatten",
    "make_partition",
    "partition_matrix",
    "transpose_matrix",
    "transpose_vector",
    "Attractor",
    "AttractorCensus",
    "Comparator",
    "Direction",
    "FirstStepMode",
    "HiddenPattern",
    "PatternKind",
    "Side",
    "StateVector",
    "StepRecord",
    "ThresholdPolicy",
    "ThresholdRule",
    "apply_threshold",
    "apply_update",
    "enumerate_attractors",
    "run_hidden_pattern",
    "special_product",
    "step",
    "sweep_unit_seeds",
    "Diagnostic",
    "ModelKind",
    "ModelSpec",
    "PolicyOverrides",
    "describe",
    "run_model",
    "seed_from_labels",
    "validate_model",
    "FIXTURE_NAMES",
    "RunReport",
    "build_report",
    "emit_dot",
    "fixture_text",
    "load_fixture",
    "parse_model",
    "report_to_text",
    "serialize_model",
    "serialize_report",
    "errors",
]
