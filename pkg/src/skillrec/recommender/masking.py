"""Sequence construction and the two masking protocols.

A student history becomes a flat token sequence in which every course of one
semester shares that semester's ordinal as its position index. Pre-training
masks positions by percentage sampling; fine-tuning masks exactly the latest
semester, which is what next-semester scoring replays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..catalog import EnrollmentHistory

MASK_TOKEN = "[MASK]"


@dataclass
class SequenceExample:
    items: list[str]            # course ids, semester by semester
    positions: list[int]        # semester ordinal per item, non-decreasing
    majors: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.items) != len(self.positions):
            raise ValueError("items and positions must align")
        if any(b < a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be non-decreasing")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def n_semesters(self) -> int:
        return self.positions[-1] + 1 if self.positions else 0


@dataclass
class MaskedBatch:
    input_items: list[str]      # items with MASK_TOKEN at masked slots
    positions: list[int]
    majors: list[str]
    target_indices: list[int]   # sequence indices that were masked
    target_items: list[str]     # original course ids at those indices
    mask_rate: float
    forced: bool = False        # no position was sampled, one was forced

    def __post_init__(self):
        if not self.target_indices:
            raise ValueError("a masked batch needs at least one masked position")
        for idx, item in zip(self.target_indices, self.target_items):
            if self.input_items[idx] != MASK_TOKEN:
                raise ValueError(f"target index {idx} is not masked in the input")
            if item == MASK_TOKEN:
                raise ValueError("target item cannot be the mask token")


def sequence_from_history(history: EnrollmentHistory) -> SequenceExample:
    """Flatten semesters (sorted within each, for determinism) into a sequence."""
    items: list[str] = []
    positions: list[int] = []
    for ordinal, sem in enumerate(history.semesters):
        for cid in sorted(sem):
            items.append(cid)
            positions.append(ordinal)
    return SequenceExample(items=items, positions=positions, majors=list(history.major))


def _masked(example: SequenceExample, chosen: list[int], rate: float,
            forced: bool) -> MaskedBatch:
    inputs = list(example.items)
    targets = []
    for idx in chosen:
        targets.append(example.items[idx])
        inputs[idx] = MASK_TOKEN
    return MaskedBatch(
        input_items=inputs,
        positions=list(example.positions),
        majors=list(example.majors),
        target_indices=list(chosen),
        target_items=targets,
        mask_rate=rate,
        forced=forced,
    )


def mask_sampling(example: SequenceExample, rate: float, seed: int) -> MaskedBatch:
    """Mask each position independently with probability rate.

    If the draw selects nothing, one uniformly chosen position is forced so
    every batch trains on something.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must be in (0, 1]")
    if len(example) == 0:
        raise ValueError("cannot mask an empty example")
    rng = np.random.default_rng(seed)
    chosen = [i for i in range(len(example)) if rng.random() < rate]
    forced = False
    if not chosen:
        chosen = [int(rng.integers(len(example)))]
        forced = True
    return _masked(example, chosen, rate, forced)


def mask_latest_semester(example: SequenceExample) -> MaskedBatch:
    """Mask every course in the final semester; earlier semesters are context."""
    if len(example) == 0:
        raise ValueError("cannot mask an empty example")
    if example.n_semesters < 2:
        raise ValueError("need at least two semesters to mask the latest one")
    last = example.positions[-1]
    chosen = [i for i, p in enumerate(example.positions) if p == last]
    return _masked(example, chosen, rate=1.0, forced=False)
