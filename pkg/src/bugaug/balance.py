"""Dataset balancing: selectively augment under-represented bug reports.

Caps are derived from the training set itself: a bug report may occur at most
ceil(alpha * M_br) times and a class at most ceil(omega * M_cl) times, where
M_br/M_cl are the maximum per-bug and per-class positive counts in the input.
The input is copied as-is (copies may exceed the caps); only additions are
constrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .builder import MakeReportId
from .corpus import NegativeSampler
from .model import Dataset, TrainingSample
from .rng import derive_rng


def scaled_cap(factor: float, maximum: int) -> int:
    # exact rational product: ceil(1.3 * 10) must be 13, not 14
    return math.ceil(Fraction(str(factor)) * maximum)


def balance_dataset(
    d_train: Dataset,
    alpha: float,
    omega: float,
    make_report: MakeReportId,
    sampler: NegativeSampler,
    seed: int,
    name: str = "D_bl",
) -> Dataset:
    """Grow each bug toward the per-bug cap by adding (fresh augmented report,
    eligible hunk) positives, one fresh negative per addition; a hunk is
    eligible while its class sits below the class cap."""
    if alpha <= 0 or omega <= 0:
        raise ValueError("alpha and omega must be positive")
    positives = d_train.positives()
    if not positives:
        raise ValueError("d_train has no positive samples")
    bug_counts = d_train.positive_counts_by_bug()
    class_counts = d_train.positive_counts_by_class()
    max_br = scaled_cap(alpha, max(bug_counts.values()))
    max_cl = scaled_cap(omega, max(class_counts.values()))

    hunks_by_bug: dict[str, list[tuple[str, str]]] = {}
    for p in positives:
        pairs = hunks_by_bug.setdefault(p.origin_bug_id, [])
        if (p.hunk_id, p.class_name) not in pairs:
            pairs.append((p.hunk_id, p.class_name))
    for pairs in hunks_by_bug.values():
        pairs.sort()

    samples = list(d_train.samples)
    for bug in sorted(hunks_by_bug):
        rng = derive_rng(seed, "balance", bug)
        ordinal = 0
        while bug_counts[bug] < max_br:
            eligible = [(h, c) for h, c in hunks_by_bug[bug] if class_counts[c] < max_cl]
            if not eligible:
                break
            hunk_id, class_name = eligible[rng.randrange(len(eligible))]
            ordinal += 1
            aug_id = make_report(bug, ordinal)
            samples.append(
                TrainingSample(
                    bug_ref=aug_id,
                    origin_bug_id=bug,
                    hunk_id=hunk_id,
                    class_name=class_name,
                    label="positive",
                )
            )
            neg = sampler.draw(bug, derive_rng(seed, "negative", name, aug_id))
            samples.append(
                TrainingSample(
                    bug_ref=aug_id,
                    origin_bug_id=bug,
                    hunk_id=neg.id,
                    class_name=neg.class_name,
                    label="negative",
                )
            )
            bug_counts[bug] += 1
            class_counts[class_name] = class_counts.get(class_name, 0) + 1
    return Dataset(name=name, samples=samples)


@dataclass
class DistributionReport:
    """Occurrence counts over positive samples, largest first."""

    per_bug_counts: list[tuple[str, int]]
    per_class_counts: list[tuple[str, int]]

    @property
    def total(self) -> int:
        return sum(c for _, c in self.per_bug_counts)

    def topk_bug_share(self, k: int) -> float:
        return sum(c for _, c in self.per_bug_counts[:k]) / self.total

    def topk_class_share(self, k: int) -> float:
        return sum(c for _, c in self.per_class_counts[:k]) / self.total

    def to_dict(self, top_k: int = 10) -> dict:
        return {
            "total_positives": self.total,
            "distinct_bugs": len(self.per_bug_counts),
            "distinct_classes": len(self.per_class_counts),
            "per_bug_counts": [[b, c] for b, c in self.per_bug_counts],
            "per_class_counts": [[cl, c] for cl, c in self.per_class_counts],
            "topk_bug_share": {str(k): self.topk_bug_share(k) for k in range(1, top_k + 1)},
            "topk_class_share": {str(k): self.topk_class_share(k) for k in range(1, top_k + 1)},
        }


def distribution_report(dataset: Dataset) -> DistributionReport:
    bug_counts = dataset.positive_counts_by_bug()
    if not bug_counts:
        raise ValueError(f"dataset {dataset.name!r} has no positive samples")
    class_counts = dataset.positive_counts_by_class()
    return DistributionReport(
        per_bug_counts=sorted(bug_counts.items(), key=lambda kv: (-kv[1], kv[0])),
        per_class_counts=sorted(class_counts.items(), key=lambda kv: (-kv[1], kv[0])),
    )
