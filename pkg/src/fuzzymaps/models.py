"""Model kinds binding labels, connection matrix, entry domain and policy.

A model fixes the orientation convention once and for all: matrix rows are
the domain side, columns the range side.  Kinds are classified structurally
from the two partitions, never from prose names.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional

from .dynamics import (
    FirstStepMode,
    HiddenPattern,
    Side,
    StateVector,
    ThresholdPolicy,
    ThresholdRule,
    run_hidden_pattern,
    DEFAULT_MAX_STEPS,
)
from .errors import ModelValidationError, UnknownLabel, WrongSide
from .supermatrix import (
    EntryDomain,
    Partition,
    SuperMatrix,
    check_entry_domain,
)

__all__ = [
    "ModelKind",
    "ModelSpec",
    "Diagnostic",
    "PolicyOverrides",
    "validate_model",
    "seed_from_labels",
    "run_model",
    "describe",
]


class ModelKind(str, Enum):
    FCM = "fcm"
    FRM = "frm"
    SUPER_ROW_FRM = "super_row_frm"
    SUPER_COLUMN_FRM = "super_column_frm"
    SUPER_FRM = "super_frm"


@dataclass(frozen=True)
class ModelSpec:
    """A runnable model: labels, connection matrix, entry domain, policy."""

    name: str
    kind: ModelKind
    domain_labels: tuple[tuple[str, ...], ...]
    range_labels: tuple[tuple[str, ...], ...]
    matrix: SuperMatrix
    entry_domain: EntryDomain
    policy: ThresholdPolicy
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "entry_domain", EntryDomain(self.entry_domain))
        object.__setattr__(
            self,
            "domain_labels",
            tuple(tuple(b) for b in self.domain_labels),
        )
        object.__setattr__(
            self,
            "range_labels",
            tuple(tuple(b) for b in self.range_labels),
        )

    @property
    def one_sided(self) -> bool:
        return self.kind is ModelKind.FCM

    def labels_flat(self, side: Side) -> tuple[str, ...]:
        blocks = (
            self.domain_labels if Side(side) is Side.DOMAIN else self.range_labels
        )
        return tuple(label for blk in blocks for label in blk)

    def side_partition(self, side: Side) -> Partition:
        return (
            self.matrix.row_partition
            if Side(side) is Side.DOMAIN
            else self.matrix.col_partition
        )


@dataclass(frozen=True)
class Diagnostic:
    """One violated invariant, pinned to a location in the model."""

    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.location}: {self.message}"


def _expected_kind(matrix: SuperMatrix) -> ModelKind:
    rp, cp = matrix.row_partition, matrix.col_partition
    if rp.trivial and cp.trivial:
        return ModelKind.FRM
    if cp.trivial:
        return ModelKind.SUPER_COLUMN_FRM
    if rp.trivial:
        return ModelKind.SUPER_ROW_FRM
    return ModelKind.SUPER_FRM


def validate_model(spec: ModelSpec) -> tuple[Diagnostic, ...]:
    """Report every violated invariant; an empty result means ok."""
    out: list[Diagnostic] = []
    m = spec.matrix

    for side, blocks, part in (
        ("domain", spec.domain_labels, m.row_partition),
        ("range", spec.range_labels, m.col_partition),
    ):
        if len(blocks) != part.n_blocks:
            out.append(
                Diagnostic(
                    "label_blocks",
                    f"{side}.blocks",
                    f"{len(blocks)} label blocks against {part.n_blocks} "
                    "partition blocks",
                )
            )
        else:
            for i, (blk, size) in enumerate(zip(blocks, part.sizes)):
                if len(blk) != size:
                    out.append(
                        Diagnostic(
                            "label_block_size",
                            f"{side}.blocks[{i}]",
                            f"{len(blk)} labels against block width {size}",
                        )
                    )
        flat = [label for blk in blocks for label in blk]
        dupes = sorted({x for x in flat if flat.count(x) > 1})
        if dupes:
            out.append(
                Diagnostic(
                    "duplicate_labels",
                    f"{side}.blocks",
                    "labels repeat: " + ", ".join(dupes),
                )
            )

    for i, j, v in check_entry_domain(m, spec.entry_domain):
        out.append(
            Diagnostic(
                "entry_domain",
                f"matrix[{i}][{j}]",
                f"entry {v:g} outside {spec.entry_domain.value}",
            )
        )

    if spec.kind is ModelKind.FCM:
        if m.n_rows != m.n_cols:
            out.append(
                Diagnostic(
                    "fcm_square",
                    "matrix",
                    f"fcm needs a square matrix, got {m.n_rows}x{m.n_cols}",
                )
            )
        if not (m.row_partition.trivial and m.col_partition.trivial):
            out.append(
                Diagnostic(
                    "fcm_partitions",
                    "matrix",
                    "fcm needs trivial partitions on both axes",
                )
            )
        if spec.domain_labels != spec.range_labels:
            out.append(
                Diagnostic(
                    "fcm_labels",
                    "range.blocks",
                    "fcm needs identical domain and range labels",
                )
            )
    else:
        expected = _expected_kind(m)
        if spec.kind is not expected:
            out.append(
                Diagnostic(
                    "kind_partitions",
                    "kind",
                    f"partitions imply {expected.value}, declared {spec.kind.value}",
                )
            )
    return tuple(out)


def seed_from_labels(
    spec: ModelSpec, labels: Iterable[str], side: Side
) -> StateVector:
    """Binary state with exactly the named coordinates on (set semantics)."""
    side = Side(side)
    flat = spec.labels_flat(side)
    other = spec.labels_flat(side.opposite)
    index = {label: i for i, label in enumerate(flat)}
    on: set[int] = set()
    for label in labels:
        if label in index:
            on.add(index[label])
        elif label in other and not spec.one_sided:
            raise WrongSide(
                f"label {label!r} lives on the {side.opposite.value} side"
            )
        else:
            raise UnknownLabel(f"unknown {side.value} label {label!r}")
    return StateVector.from_on_indices(
        sorted(on), side, spec.side_partition(side)
    )


@dataclass(frozen=True)
class PolicyOverrides:
    """Optional field-by-field replacements for a model's default policy."""

    domain_rule: Optional[ThresholdRule] = None
    range_rule: Optional[ThresholdRule] = None
    first_step_rule: Optional[ThresholdRule] = None
    first_step_mode: Optional[FirstStepMode] = None

    def merge(self, policy: ThresholdPolicy) -> ThresholdPolicy:
        changes = {
            k: v
            for k, v in (
                ("domain_rule", self.domain_rule),
                ("range_rule", self.range_rule),
                ("first_step_rule", self.first_step_rule),
                ("first_step_mode", self.first_step_mode),
            )
            if v is not None
        }
        return replace(policy, **changes) if changes else policy


def run_model(
    spec: ModelSpec,
    seed: StateVector,
    overrides: Optional[PolicyOverrides] = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> HiddenPattern:
    """Validate, merge policy overrides, and run the hidden-pattern engine."""
    problems = validate_model(spec)
    if problems:
        raise ModelValidationError(
            "; ".join(str(p) for p in problems)
        )
    policy = overrides.merge(spec.policy) if overrides else spec.policy
    return run_hidden_pattern(
        spec.matrix,
        seed,
        policy,
        max_steps=max_steps,
        one_sided=spec.one_sided,
    )


def describe(spec: ModelSpec) -> dict:
    """Machine-readable summary with a stable field order."""
    return {
        "name": spec.name,
        "kind": spec.kind.value,
        "rows": spec.matrix.n_rows,
        "cols": spec.matrix.n_cols,
        "row_blocks": list(spec.matrix.row_partition.sizes),
        "col_blocks": list(spec.matrix.col_partition.sizes),
        "entry_domain": spec.entry_domain.value,
        "policy": {
            "domain": {
                "cmp": spec.policy.domain_rule.comparator.value,
                "cutoff": spec.policy.domain_rule.cutoff,
            },
            "range": {
                "cmp": spec.policy.range_rule.comparator.value,
                "cutoff": spec.policy.range_rule.cutoff,
            },
            "first_step": {
                "mode": spec.policy.first_step_mode.value,
                "cmp": spec.policy.first_step_rule.comparator.value,
                "cutoff": spec.policy.first_step_rule.cutoff,
            },
        },
    }
