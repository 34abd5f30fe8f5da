"""
ISO/IEC 30107-3 style PAD metrics over ScoreSets.

Decision rule throughout: a presentation is classified as an attack iff its
score >= threshold.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ocpad.errors import DataContractError, UsageError
from ocpad.models.score_set import DetCurve, ScoreSet
from ocpad.schemas.report import EvaluationReport, FusionEntry, FusionReport, MissedOverlap, OperatingPoint

logger = logging.getLogger(__name__)

PAUC_LIMIT = 0.2
REPORT_BPCERS = (0.002, 0.01, 0.05)


def _sorted_classes(scores: ScoreSet) -> Tuple[np.ndarray, np.ndarray]:
    scores.require_both_classes()
    return np.sort(scores.attack_scores), np.sort(scores.bonafide_scores)


def _rates(attacks: np.ndarray, bonafides: np.ndarray, thresholds) -> Tuple[np.ndarray, np.ndarray]:
    thresholds = np.asarray(thresholds, dtype=np.float64)
    apcer = np.searchsorted(attacks, thresholds, side="left") / attacks.size
    bpcer = (bonafides.size - np.searchsorted(bonafides, thresholds, side="left")) / bonafides.size
    return apcer, bpcer


def apcer(scores: ScoreSet, threshold: float) -> float:
    """Share of attacks scored below the threshold, i.e. accepted as bona fide."""
    attacks, bonafides = _sorted_classes(scores)
    return float(_rates(attacks, bonafides, [threshold])[0][0])


def bpcer(scores: ScoreSet, threshold: float) -> float:
    """Share of bona fides scored at or above the threshold."""
    attacks, bonafides = _sorted_classes(scores)
    return float(_rates(attacks, bonafides, [threshold])[1][0])


def species_apcer(scores: ScoreSet, threshold: float) -> Dict[str, float]:
    scores.require_both_classes()
    is_attack = scores.is_attack
    species = np.array(scores.species, dtype=object)
    out = {}
    for name in sorted(set(species[is_attack])):
        selected = scores.scores[is_attack & (species == name)]
        out[name] = float((selected < threshold).mean())
    return out


def worst_species(per_species: Dict[str, float]) -> Tuple[Optional[str], float]:
    if not per_species:
        return None, 0.0
    name = max(sorted(per_species), key=lambda s: per_species[s])
    return name, per_species[name]


def missed_attacks(scores: ScoreSet, threshold: float) -> List[Tuple[str, str, float]]:
    """
    (sample_id, species, score) of attacks classified bona fide, lowest score first.
    """
    missed = [(sid, sp, float(s)) for sid, sp, s, a in
              zip(scores.sample_ids, scores.species, scores.scores, scores.is_attack) if a and s < threshold]
    return sorted(missed, key=lambda m: (m[2], m[0]))


def det_curve(scores: ScoreSet) -> DetCurve:
    """
    Operating points at every distinct score plus the -inf/+inf sentinels,
    with consecutive duplicate (APCER, BPCER) pairs collapsed.
    """
    attacks, bonafides = _sorted_classes(scores)
    thresholds = np.concatenate([[-np.inf], np.unique(scores.scores), [np.inf]])
    a, b = _rates(attacks, bonafides, thresholds)
    keep = np.ones(thresholds.size, dtype=bool)
    keep[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    return DetCurve(thresholds=thresholds[keep], apcer=a[keep], bpcer=b[keep])


def pauc(curve: DetCurve, limit: float = PAUC_LIMIT) -> float:
    """
    Trapezoidal area under BPCER over APCER in [0, limit], divided by limit.
    """
    if not 0 < limit <= 1:
        raise UsageError(f"pAUC limit must be in (0, 1], got {limit}")
    x = np.asarray(curve.apcer, dtype=np.float64)
    y = np.minimum(np.asarray(curve.bpcer, dtype=np.float64), 1.0)
    area = 0.0
    for k in range(1, x.size):
        x0, x1, y0, y1 = x[k - 1], x[k], y[k - 1], y[k]
        if x0 >= limit:
            break
        if x1 > limit:
            y1 = y0 + (y1 - y0) * (limit - x0) / (x1 - x0)
            x1 = limit
        area += (x1 - x0) * (y0 + y1) / 2
    if x.size and x[-1] < limit:
        # Step continuation past the last point.
        area += (limit - x[-1]) * y[-1]
    return float(area / limit)


def pauc20(curve: DetCurve) -> float:
    return pauc(curve, PAUC_LIMIT)


def d_eer(scores: ScoreSet) -> Tuple[float, float]:
    """
    (D-EER, threshold) where APCER = BPCER, linearly interpolated between
    the two operating points that straddle the crossing.
    """
    curve = det_curve(scores)
    diff = curve.apcer - curve.bpcer
    k = int(np.argmax(diff >= 0))
    if diff[k] == 0 or k == 0:
        return float(curve.apcer[k]), float(curve.thresholds[k])
    t = -diff[k - 1] / (diff[k] - diff[k - 1])
    eer = curve.apcer[k - 1] + t * (curve.apcer[k] - curve.apcer[k - 1])
    lo, hi = curve.thresholds[k - 1], curve.thresholds[k]
    if np.isfinite(lo) and np.isfinite(hi):
        threshold = lo + t * (hi - lo)
    else:
        threshold = lo if np.isfinite(lo) else hi
    return float(eer), float(threshold)


def apcer_at_bpcer(scores: ScoreSet, target_bpcer: float) -> OperatingPoint:
    """
    Operating point at the smallest threshold with BPCER <= target.
    """
    if not 0 <= target_bpcer <= 1:
        raise UsageError(f"target BPCER must be in [0, 1], got {target_bpcer}")
    attacks, bonafides = _sorted_classes(scores)
    thresholds = np.concatenate([[-np.inf], np.unique(scores.scores), [np.inf]])
    a, b = _rates(attacks, bonafides, thresholds)
    # BPCER is nonincreasing in the threshold; +inf is always feasible.
    feasible = np.flatnonzero(b <= target_bpcer)
    k = int(feasible[0]) if feasible.size else thresholds.size - 1
    return OperatingPoint(target_bpcer=target_bpcer, threshold=float(thresholds[k]),
                          apcer=float(a[k]), bpcer=float(b[k]))


def evaluate(scores: ScoreSet, label: str = "", bpcers: Sequence[float] = REPORT_BPCERS) -> EvaluationReport:
    """
    Headline metrics; the per-species breakdown uses the first BPCER operating point.
    """
    curve = det_curve(scores)
    eer, eer_threshold = d_eer(scores)
    points = [apcer_at_bpcer(scores, target) for target in bpcers]
    threshold = points[0].threshold
    per_species = species_apcer(scores, threshold)
    worst, worst_value = worst_species(per_species)
    missed: Dict[str, int] = {}
    for _, species, _ in missed_attacks(scores, threshold):
        missed[species] = missed.get(species, 0) + 1
    report = EvaluationReport(
        label=label, n_bonafide=int((~scores.is_attack).sum()), n_attack=int(scores.is_attack.sum()),
        d_eer=eer, d_eer_threshold=eer_threshold, pauc20=100.0 * pauc20(curve),
        operating_points=points, species_apcer=per_species, worst_species=worst,
        worst_species_apcer=worst_value, missed_attacks=dict(sorted(missed.items())),
    )
    logger.info(f"{label or 'scores'}: D-EER {100 * eer:.2f}%, pAUC@20 {report.pauc20:.2f}%, "
                f"APCER@BPCER={100 * points[0].target_bpcer:g}% {100 * points[0].apcer:.2f}%")
    return report


# Fusion

@dataclass(frozen=True)
class NormalizationStats:
    minimum: float
    maximum: float

    @property
    def degenerate(self) -> bool:
        return not self.maximum > self.minimum

    @classmethod
    def of(cls, scores: ScoreSet) -> "NormalizationStats":
        if len(scores) == 0:
            raise DataContractError("cannot take normalization stats of an empty score set")
        return cls(float(scores.scores.min()), float(scores.scores.max()))

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.degenerate:
            return np.full(np.shape(values), 0.5)
        return np.clip((np.asarray(values) - self.minimum) / (self.maximum - self.minimum), 0.0, 1.0)


def fuse(scores_a: ScoreSet, scores_b: ScoreSet, weight: float,
         stats_a: NormalizationStats, stats_b: NormalizationStats) -> ScoreSet:
    """
    weight * norm(a) + (1 - weight) * norm(b), aligned on sample ids.
    """
    if not 0 <= weight <= 1:
        raise UsageError(f"fusion weight must be in [0, 1], got {weight}")
    scores_b = scores_b.aligned_to(scores_a.sample_ids)
    if scores_b.labels != scores_a.labels:
        raise DataContractError("fused score sets disagree on labels")
    fused = weight * stats_a.apply(scores_a.scores) + (1 - weight) * stats_b.apply(scores_b.scores)
    return scores_a.with_scores(fused)


def resolve_stats(scores_a: ScoreSet, scores_b: ScoreSet,
                  stats_a: Optional[NormalizationStats] = None,
                  stats_b: Optional[NormalizationStats] = None) -> Tuple[NormalizationStats, NormalizationStats, str]:
    """
    Reference stats when both are given, otherwise the scored sets' own
    ranges, which leaks test information.
    """
    if stats_a is not None and stats_b is not None:
        return stats_a, stats_b, "reference"
    logger.warning("No reference split for fusion normalization; using the scored sets' own ranges")
    return NormalizationStats.of(scores_a), NormalizationStats.of(scores_b), "scored"


def fusion_sweep(scores_a: ScoreSet, scores_b: ScoreSet, weights: Sequence[float],
                 stats_a: Optional[NormalizationStats] = None,
                 stats_b: Optional[NormalizationStats] = None) -> FusionReport:
    """Evaluate the fusion at every weight."""
    stats_a, stats_b, source = resolve_stats(scores_a, scores_b, stats_a, stats_b)

    degenerate = [name for name, stats in (("a", stats_a), ("b", stats_b)) if stats.degenerate]
    if degenerate:
        logger.warning(f"Degenerate normalization range for source(s) {degenerate}; they contribute 0.5")
    entries = [FusionEntry(weight=w, report=evaluate(fuse(scores_a, scores_b, w, stats_a, stats_b), f"w={w:g}"))
               for w in weights]
    return FusionReport(entries=entries, degenerate=degenerate, stats_source=source)


def missed_overlap(first: ScoreSet, second: ScoreSet, names: Sequence[str] = ("a", "b"),
                   target_bpcer: float = REPORT_BPCERS[0]) -> MissedOverlap:
    """
    Attacks each source misses at its own ``target_bpcer`` operating point,
    and the misses they share.
    """
    if len(names) != 2 or names[0] == names[1]:
        raise UsageError(f"need two distinct source names, got {list(names)}")
    second = second.aligned_to(first.sample_ids)
    if second.labels != first.labels:
        raise DataContractError("compared score sets disagree on labels")
    missed = {}
    for name, scores in zip(names, (first, second)):
        threshold = apcer_at_bpcer(scores, target_bpcer).threshold
        missed[name] = sorted(sample_id for sample_id, _, _ in missed_attacks(scores, threshold))
    shared = sorted(set(missed[names[0]]) & set(missed[names[1]]))
    first_missed = len(missed[names[0]])
    overlap = MissedOverlap(target_bpcer=target_bpcer, sources=list(names), missed=missed, shared=shared,
                            first_shared=len(shared) / first_missed if first_missed else None)
    logger.info(f"At BPCER {100 * target_bpcer:g}%: {names[0]} misses {first_missed}, "
                f"{names[1]} misses {len(missed[names[1]])}, {len(shared)} shared")
    return overlap
