"""Threshold dynamics over partitioned connection matrices.

The engine iterates the special product (multiply on the flattened grid,
re-partition the result), thresholds each raw sum vector to binary, forces
the seed's coordinates back on whenever a state is produced on the seed's
side, and stops when a seed-side state recurs.  The recurrence is either a
fixed point or a limit cycle: the hidden pattern.

Two layouts are supported: two-sided models alternate forward (rows to
columns) and backward (columns to rows) products; one-sided models square
the same state repeatedly against a square matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    StateSpaceTooLarge,
    StepLimitExceeded,
)
from .supermatrix import Orientation, Partition, SuperMatrix, SuperVector

__all__ = [
    "Side",
    "Direction",
    "Comparator",
    "ThresholdRule",
    "FirstStepMode",
    "ThresholdPolicy",
    "StateVector",
    "StepRecord",
    "PatternKind",
    "HiddenPattern",
    "Attractor",
    "AttractorCensus",
    "special_product",
    "apply_threshold",
    "apply_update",
    "step",
    "run_hidden_pattern",
    "sweep_unit_seeds",
    "enumerate_attractors",
    "GT_ZERO",
]

DEFAULT_MAX_STEPS = 10_000


class Side(str, Enum):
    DOMAIN = "domain"
    RANGE = "range"

    @property
    def opposite(self) -> "Side":
        return Side.RANGE if self is Side.DOMAIN else Side.DOMAIN


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class Comparator(str, Enum):
    GE = "ge"
    GT = "gt"


@dataclass(frozen=True)
class ThresholdRule:
    """Map each raw sum to 1 iff it compares true against the cutoff."""

    comparator: Comparator
    cutoff: float

    def __post_init__(self):
        object.__setattr__(self, "comparator", Comparator(self.comparator))
        object.__setattr__(self, "cutoff", float(self.cutoff))

    def apply(self, raw) -> np.ndarray:
        a = np.asarray(raw, dtype=float)
        if self.comparator is Comparator.GE:
            bits = a >= self.cutoff
        else:
            bits = a > self.cutoff
        return bits.astype(np.uint8)

    def describe(self) -> str:
        sym = ">=" if self.comparator is Comparator.GE else ">"
        return f"{sym} {_fmt_number(self.cutoff)}"


GT_ZERO = ThresholdRule(Comparator.GT, 0.0)


class FirstStepMode(str, Enum):
    AUTO = "auto"
    ALWAYS = "always"
    NEVER = "never"


@dataclass(frozen=True)
class ThresholdPolicy:
    """Per-side threshold rules plus the first-product convention.

    ``first_step_mode`` decides when ``first_step_rule`` replaces the
    producing side's rule on the very first product of a run:

    * ``auto`` (default): only when the seed has exactly one on-coordinate.
      A unit seed's first raw sums are a single matrix row or column, so
      large cutoffs would extinguish it; "positive means on" is what the
      worked trajectories apply there.
    * ``always``: every run's first product.
    * ``never``: side rules from the first product onward.
    """

    domain_rule: ThresholdRule
    range_rule: ThresholdRule
    first_step_rule: ThresholdRule = GT_ZERO
    first_step_mode: FirstStepMode = FirstStepMode.AUTO

    def __post_init__(self):
        object.__setattr__(
            self, "first_step_mode", FirstStepMode(self.first_step_mode)
        )

    def rule_for(self, side: Side) -> ThresholdRule:
        return self.domain_rule if side is Side.DOMAIN else self.range_rule

    def first_step_applies(self, seed: "StateVector", step_index: int) -> bool:
        if step_index != 1 or self.first_step_mode is FirstStepMode.NEVER:
            return False
        if self.first_step_mode is FirstStepMode.ALWAYS:
            return True
        return seed.count_on == 1


def _fmt_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class StateVector:
    """Binary on/off assignment over one side's nodes."""

    bits: tuple[int, ...]
    side: Side
    partition: Partition

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("state bits must be 0 or 1")
        if self.partition.total != len(bits):
            raise DimensionMismatch(
                f"partition covers {self.partition.total} nodes, "
                f"state has {len(bits)}"
            )
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "side", Side(self.side))

    @classmethod
    def zeros(cls, side: Side, partition: Partition) -> "StateVector":
        return cls((0,) * partition.total, side, partition)

    @classmethod
    def from_on_indices(
        cls, on: Iterable[int], side: Side, partition: Partition
    ) -> "StateVector":
        n = partition.total
        bits = [0] * n
        for i in on:
            if not 0 <= i < n:
                raise IndexOutOfRange(f"index {i} out of range for {n} nodes")
            bits[i] = 1
        return cls(tuple(bits), side, partition)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def on_indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    @property
    def count_on(self) -> int:
        return sum(self.bits)

    @property
    def bitmask(self) -> int:
        mask = 0
        for i, b in enumerate(self.bits):
            if b:
                mask |= 1 << i
        return mask

    def array(self) -> np.ndarray:
        return np.array(self.bits, dtype=float)

    def blocked_str(self) -> str:
        """Render like ``110|010`` with bars at partition cuts."""
        off = self.partition.offsets
        parts = [
            "".join(str(b) for b in self.bits[off[i] : off[i + 1]])
            for i in range(self.partition.n_blocks)
        ]
        return "|".join(parts)


@dataclass(frozen=True)
class StepRecord:
    """One product of the iteration, before and after thresholding."""

    step_index: int
    produced_side: Side
    raw: tuple[float, ...]
    thresholded: tuple[int, ...]
    after_update: tuple[int, ...]
    rule_applied: ThresholdRule


class PatternKind(str, Enum):
    FIXED_POINT = "fixed_point"
    LIMIT_CYCLE = "limit_cycle"


@dataclass(frozen=True)
class HiddenPattern:
    """Eventual behaviour of a run: a fixed pair or a limit cycle.

    ``pair_sequence`` holds one (domain state, range state) pair per cycle
    position; one forward product from a pair's domain member yields its
    range member, and one backward product (with seed forcing) yields the
    next pair's domain member.  One-sided runs store the same state in both
    slots.  ``steps_to_enter`` counts full rounds before the cycle's first
    state appears.
    """

    kind: PatternKind
    period: int
    pair_sequence: tuple[tuple[StateVector, StateVector], ...]
    steps_to_enter: int
    trace: Optional[tuple[StepRecord, ...]] = None

    @property
    def fixed_pair(self) -> tuple[StateVector, StateVector]:
        if self.kind is not PatternKind.FIXED_POINT:
            raise ValueError("not a fixed point")
        return self.pair_sequence[0]

    def seed_side_states(self, side: Side) -> tuple[StateVector, ...]:
        idx = 0 if side is Side.DOMAIN else 1
        return tuple(pair[idx] for pair in self.pair_sequence)


def special_product(
    x, matrix: SuperMatrix, direction: Direction
) -> SuperVector:
    """Multiply on the flattened grid and re-partition the raw sums.

    Forward maps a row-length vector to column-partitioned sums
    ``y_j = sum_i x_i M[i, j]``; backward multiplies by the transpose and
    carries the row partition.
    """
    direction = Direction(direction)
    if isinstance(x, StateVector):
        vec = x.array()
    elif isinstance(x, SuperVector):
        vec = x.entries
    else:
        vec = np.asarray(x, dtype=float)
    if vec.ndim != 1:
        raise DimensionMismatch("state must be one-dimensional")
    if direction is Direction.FORWARD:
        if vec.shape[0] != matrix.n_rows:
            raise DimensionMismatch(
                f"forward product needs length {matrix.n_rows}, got {vec.shape[0]}"
            )
        raw = vec @ matrix.entries
        part = matrix.col_partition
    else:
        if vec.shape[0] != matrix.n_cols:
            raise DimensionMismatch(
                f"backward product needs length {matrix.n_cols}, got {vec.shape[0]}"
            )
        raw = matrix.entries @ vec
        part = matrix.row_partition
    return SuperVector(raw, part, Orientation.ROW)


def apply_threshold(raw, rule: ThresholdRule) -> np.ndarray:
    return rule.apply(raw)


def apply_update(bits, forced_on: Iterable[int]) -> np.ndarray:
    """Force the given coordinates to 1, leaving all others unchanged."""
    out = np.array(bits, dtype=np.uint8).copy()
    for i in forced_on:
        if not 0 <= i < out.shape[0]:
            raise IndexOutOfRange(
                f"forced index {i} out of range for {out.shape[0]} nodes"
            )
        out[i] = 1
    return out


def _side_partition(matrix: SuperMatrix, side: Side) -> Partition:
    return matrix.row_partition if side is Side.DOMAIN else matrix.col_partition


def _check_seed(matrix: SuperMatrix, seed: StateVector, one_sided: bool) -> None:
    if one_sided and matrix.n_rows != matrix.n_cols:
        raise DimensionMismatch("one-sided runs need a square matrix")
    expect = matrix.n_rows if seed.side is Side.DOMAIN else matrix.n_cols
    if len(seed) != expect:
        raise DimensionMismatch(
            f"seed on {seed.side.value} side needs length {expect}, got {len(seed)}"
        )


def step(
    matrix: SuperMatrix,
    state: StateVector,
    policy: ThresholdPolicy,
    seed: StateVector,
    step_index: int,
    one_sided: bool = False,
) -> StepRecord:
    """One product: multiply, threshold, then force seed coordinates.

    Domain states multiply forward, range states backward; a one-sided run
    keeps every product on the domain side.  The producing side's rule
    applies unless this is the run's first product and the policy's
    first-step rule takes over.  Seed coordinates are forced only on states
    produced on the seed's side.
    """
    if one_sided:
        direction = Direction.FORWARD
        produced_side = state.side
    else:
        direction = (
            Direction.FORWARD if state.side is Side.DOMAIN else Direction.BACKWARD
        )
        produced_side = state.side.opposite
    raw = special_product(state, matrix, direction)
    if policy.first_step_applies(seed, step_index):
        rule = policy.first_step_rule
    else:
        rule = policy.rule_for(produced_side)
    thresholded = apply_threshold(raw.entries, rule)
    if produced_side is seed.side:
        updated = apply_update(thresholded, seed.on_indices)
    else:
        updated = thresholded
    return StepRecord(
        step_index=step_index,
        produced_side=produced_side,
        raw=raw.as_tuple(),
        thresholded=tuple(int(b) for b in thresholded),
        after_update=tuple(int(b) for b in updated),
        rule_applied=rule,
    )


def run_hidden_pattern(
    matrix: SuperMatrix,
    seed: StateVector,
    policy: ThresholdPolicy,
    max_steps: int = DEFAULT_MAX_STEPS,
    one_sided: bool = False,
    record_trace: bool = True,
) -> HiddenPattern:
    """Iterate from ``seed`` until a seed-side state recurs.

    Seed-side states are recorded from the first completed round onward;
    the initial seed itself is excluded because the first product may be
    thresholded by a different rule, so only later states are guaranteed
    to lie on the stationary map.  Recurrence at the immediately preceding
    visit is a fixed point, any longer gap a limit cycle.
    """
    if max_steps < 2:
        raise ValueError("max_steps must be at least 2")
    _check_seed(matrix, seed, one_sided)
    seed_part = _side_partition(matrix, seed.side)
    if seed.partition != seed_part:
        raise DimensionMismatch("seed partition does not match the matrix")
    opp_side = seed.side.opposite
    opp_part = _side_partition(matrix, opp_side)

    trace: list[StepRecord] = []
    # per completed round: (seed-side bits, opposite-side bits of the round)
    rounds: list[tuple[tuple[int, ...], Optional[tuple[int, ...]]]] = []
    visited: dict[tuple[int, ...], int] = {}

    state = seed
    opp_bits: Optional[tuple[int, ...]] = None
    products = 0
    while products < max_steps:
        products += 1
        rec = step(matrix, state, policy, seed, products, one_sided=one_sided)
        if record_trace:
            trace.append(rec)
        part = seed_part if rec.produced_side is seed.side else opp_part
        state = StateVector(rec.after_update, rec.produced_side, part)
        if rec.produced_side is not seed.side:
            opp_bits = rec.after_update
            continue
        v = rec.after_update
        if v in visited:
            j = visited[v]  # 1-based round index of first occurrence
            k = len(rounds) + 1
            period = k - j
            pairs = _build_pairs(
                rounds, (v, opp_bits), j, period, seed.side,
                seed_part, opp_part, one_sided,
            )
            kind = (
                PatternKind.FIXED_POINT if period == 1 else PatternKind.LIMIT_CYCLE
            )
            return HiddenPattern(
                kind=kind,
                period=period,
                pair_sequence=pairs,
                steps_to_enter=j - 1,
                trace=tuple(trace) if record_trace else None,
            )
        visited[v] = len(rounds) + 1
        rounds.append((v, opp_bits))
        opp_bits = None
    raise StepLimitExceeded(
        f"no recurrence within {max_steps} products; the cap is too small"
    )


def _build_pairs(
    rounds: Sequence[tuple[tuple[int, ...], Optional[tuple[int, ...]]]],
    closing_round: tuple[tuple[int, ...], Optional[tuple[int, ...]]],
    j: int,
    period: int,
    seed_side: Side,
    seed_part: Partition,
    opp_part: Partition,
    one_sided: bool,
) -> tuple[tuple[StateVector, StateVector], ...]:
    """Assemble (domain, range) pairs for the cycle rounds j .. j+period-1.

    ``rounds`` holds completed rounds 1 .. k-1 and ``closing_round`` is
    round k, the one whose seed-side state closed the cycle.
    """
    def round_at(t: int):
        return rounds[t - 1] if t <= len(rounds) else closing_round

    pairs: list[tuple[StateVector, StateVector]] = []
    for t in range(period):
        if one_sided:
            v_bits, _ = round_at(j + t)
            v_state = StateVector(v_bits, seed_side, seed_part)
            pairs.append((v_state, v_state))
        elif seed_side is Side.DOMAIN:
            # a round maps v (domain) forward to the next round's opposite
            # state, so v_{j+t} pairs with the range state of round j+t+1
            v_bits, _ = round_at(j + t)
            _, opp_next = round_at(j + t + 1)
            pairs.append(
                (
                    StateVector(v_bits, seed_side, seed_part),
                    StateVector(opp_next, seed_side.opposite, opp_part),
                )
            )
        else:
            # a round runs backward into d then forward into v, so both
            # members of a pair come from the same round j+t+1
            v_bits, opp_bits = round_at(j + t + 1)
            pairs.append(
                (
                    StateVector(opp_bits, seed_side.opposite, opp_part),
                    StateVector(v_bits, seed_side, seed_part),
                )
            )
    return tuple(pairs)


def unit_seed(
    index: int, side: Side, partition: Partition
) -> StateVector:
    return StateVector.from_on_indices([index], side, partition)


def sweep_unit_seeds(
    matrix: SuperMatrix,
    side: Side,
    policy: ThresholdPolicy,
    max_steps: int = DEFAULT_MAX_STEPS,
    one_sided: bool = False,
    record_trace: bool = False,
) -> tuple[tuple[int, HiddenPattern], ...]:
    """Run every unit vector on ``side``, in index order."""
    side = Side(side)
    part = _side_partition(matrix, side)
    out = []
    for i in range(part.total):
        seed = unit_seed(i, side, part)
        out.append(
            (
                i,
                run_hidden_pattern(
                    matrix, seed, policy, max_steps, one_sided, record_trace
                ),
            )
        )
    return tuple(out)


# --- exhaustive enumeration ------------------------------------------------

_CHUNK = 1 << 16


@dataclass(frozen=True)
class Attractor:
    """One attractor: a canonicalized cycle of seed-side states."""

    kind: PatternKind
    period: int
    states: tuple[int, ...]  # bitmasks, cycle order, minimum state first
    basin_size: int


@dataclass(frozen=True)
class AttractorCensus:
    """Every seed's outcome, grouped by attractor."""

    side: Side
    partition: Partition
    attractors: tuple[Attractor, ...]
    assignment: np.ndarray  # seed bitmask -> attractor index

    @property
    def n_seeds(self) -> int:
        return int(self.assignment.shape[0])

    def attractor_of(self, seed: "StateVector | int") -> Attractor:
        mask = seed.bitmask if isinstance(seed, StateVector) else int(seed)
        return self.attractors[int(self.assignment[mask])]

    def basin_sizes(self) -> tuple[int, ...]:
        return tuple(a.basin_size for a in self.attractors)


def canonical_cycle(states: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cycle so its smallest state comes first."""
    states = list(states)
    pivot = states.index(min(states))
    return tuple(states[pivot:] + states[:pivot])


def _bits_of_masks(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def _masks_of_bits(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    weights = (1 << np.arange(n, dtype=np.int64))
    return bits.astype(np.int64) @ weights


def _round_table(
    matrix: SuperMatrix,
    side: Side,
    policy: ThresholdPolicy,
    one_sided: bool,
    first_rule: Optional[ThresholdRule],
) -> np.ndarray:
    """Unforced one-round transition for every seed-side bitmask.

    ``first_rule`` replaces the rule of the round's first product when
    given (used to tabulate first rounds under ``always`` mode).
    """
    n = matrix.n_rows if side is Side.DOMAIN else matrix.n_cols
    total = 1 << n
    out = np.empty(total, dtype=np.int64)
    grid = matrix.entries
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        masks = np.arange(start, stop, dtype=np.int64)
        bits = _bits_of_masks(masks, n)
        if one_sided:
            rule = first_rule or policy.rule_for(side)
            nxt = rule.apply(bits @ grid)
        else:
            if side is Side.DOMAIN:
                rule1 = first_rule or policy.range_rule
                inter = rule1.apply(bits @ grid).astype(float)
                nxt = policy.domain_rule.apply(inter @ grid.T)
            else:
                rule1 = first_rule or policy.domain_rule
                inter = rule1.apply(bits @ grid.T).astype(float)
                nxt = policy.range_rule.apply(inter @ grid)
        out[start:stop] = _masks_of_bits(nxt)
    return out


def enumerate_attractors(
    matrix: SuperMatrix,
    side: Side,
    policy: ThresholdPolicy,
    state_limit: int = 1 << 20,
    one_sided: bool = False,
) -> AttractorCensus:
    """Run every possible seed on ``side`` and group outcomes by attractor.

    Trajectories agree bit for bit with :func:`run_hidden_pattern`; the two
    paths are implemented independently (vector arithmetic there, tabulated
    bitmask transitions here) so each checks the other.  Basin sizes sum to
    ``2 ** n``.
    """
    side = Side(side)
    part = _side_partition(matrix, side)
    if one_sided and matrix.n_rows != matrix.n_cols:
        raise DimensionMismatch("one-sided enumeration needs a square matrix")
    n = part.total
    if (1 << n) > state_limit:
        raise StateSpaceTooLarge(
            f"2^{n} = {1 << n} seeds exceed the limit of {state_limit}"
        )
    table = _round_table(matrix, side, policy, one_sided, None)
    mode = policy.first_step_mode
    first_table: Optional[np.ndarray] = None
    if mode is FirstStepMode.ALWAYS:
        first_table = _round_table(
            matrix, side, policy, one_sided, policy.first_step_rule
        )
    unit_first: dict[int, int] = {}
    if mode is FirstStepMode.AUTO:
        unit_rows = _bits_of_masks(
            np.array([1 << i for i in range(n)], dtype=np.int64), n
        )
        grid = matrix.entries
        if one_sided:
            nxt = policy.first_step_rule.apply(unit_rows @ grid)
        elif side is Side.DOMAIN:
            inter = policy.first_step_rule.apply(unit_rows @ grid).astype(float)
            nxt = policy.domain_rule.apply(inter @ grid.T)
        else:
            inter = policy.first_step_rule.apply(unit_rows @ grid.T).astype(float)
            nxt = policy.range_rule.apply(inter @ grid)
        for i, mask in enumerate(_masks_of_bits(nxt)):
            unit_first[1 << i] = int(mask)

    attractor_ids: dict[tuple[int, ...], int] = {}
    attractors: list[dict] = []
    assignment = np.empty(1 << n, dtype=np.int64)
    int_table = table.tolist()
    for seed_mask in range(1 << n):
        if first_table is not None:
            s = int(first_table[seed_mask]) | seed_mask
        elif seed_mask in unit_first:
            s = unit_first[seed_mask] | seed_mask
        else:
            s = int_table[seed_mask] | seed_mask
        visited: dict[int, int] = {}
        order: list[int] = []
        while s not in visited:
            visited[s] = len(order)
            order.append(s)
            s = int_table[s] | seed_mask
        j = visited[s]
        cycle = canonical_cycle(order[j:])
        idx = attractor_ids.get(cycle)
        if idx is None:
            idx = len(attractors)
            attractor_ids[cycle] = idx
            attractors.append({"states": cycle, "basin": 0})
        attractors[idx]["basin"] += 1
        assignment[seed_mask] = idx

    built = tuple(
        Attractor(
            kind=(
                PatternKind.FIXED_POINT
                if len(a["states"]) == 1
                else PatternKind.LIMIT_CYCLE
            ),
            period=len(a["states"]),
            states=a["states"],
            basin_size=a["basin"],
        )
        for a in attractors
    )
    return AttractorCensus(
        side=side, partition=part, attractors=built, assignment=assignment
    )
