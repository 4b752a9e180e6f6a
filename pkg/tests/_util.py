"""Small helpers shared by the test modules."""

from fuzzymaps import Partition, Side, StateVector


def bits(s: str) -> tuple[int, ...]:
    """Parse '110|01 0' into a bit tuple, ignoring bars and spaces."""
    return tuple(int(c) for c in s.replace("|", "").replace(" ", ""))


def seed_state(mask: int, side: Side, partition: Partition) -> StateVector:
    n = partition.total
    return StateVector(tuple((mask >> i) & 1 for i in range(n)), side, partition)


def pattern_cycle_masks(pattern, side: Side) -> tuple[int, ...]:
    """Seed-side cycle states of a hidden pattern as bitmasks."""
    masks = []
    for d, r in pattern.pair_sequence:
        state = d if side is Side.DOMAIN else r
        masks.append(state.bitmask)
    return tuple(masks)
