import numpy as np
import pytest

from ocpad.errors import DataContractError, FormatError, UsageError
from ocpad.models.score_set import DetCurve
from ocpad.services.evaluation import (
    NormalizationStats,
    apcer,
    apcer_at_bpcer,
    bpcer,
    d_eer,
    det_curve,
    evaluate,
    fuse,
    fusion_sweep,
    missed_attacks,
    missed_overlap,
    pauc,
    pauc20,
    resolve_stats,
    species_apcer,
    worst_species,
)
from ocpad.tests.conftest import make_scores
from ocpad.utils.csv_io import read_det, read_scores, write_det, write_scores

CORPUS_SIZE = 500


def random_scores(seed: int, n_bonafide: int = 30, n_attack: int = 25, rounding: int = 1):
    """Overlapping classes; rounding introduces ties."""
    rng = np.random.default_rng(seed)
    bona = np.round(rng.normal(0.0, 1.0, n_bonafide), rounding)
    attack = np.round(rng.normal(1.0, 1.0, n_attack), rounding)
    return make_scores(bona, attack)


@pytest.fixture(scope="module")
def corpus():
    """Seeded score sets of at most 200 scores with varying class sizes and tie density."""
    sets = []
    for seed in range(CORPUS_SIZE):
        rng = np.random.default_rng(10_000 + seed)
        n_bonafide, n_attack = (int(n) for n in rng.integers(1, 101, size=2))
        rounding = int(rng.choice([1, 2, 6]))
        sets.append(random_scores(seed, n_bonafide, n_attack, rounding))
    return sets


class Brute:
    """Rates recomputed by direct counting at every candidate threshold."""

    def __init__(self, scores):
        self.attack = scores.attack_scores
        self.bonafide = scores.bonafide_scores
        self.thresholds = [-np.inf] + sorted(set(scores.scores.tolist())) + [np.inf]

    def rates(self, threshold):
        return (float(np.mean(self.attack < threshold)), float(np.mean(self.bonafide >= threshold)))

    def pairs(self):
        return [self.rates(t) for t in self.thresholds]


def brute_pauc(curve, limit):
    x, y = curve.apcer, curve.bpcer
    end = int(np.argmax(x >= limit))
    xs, ys = list(x[:end]), list(y[:end])
    x0, x1, y0, y1 = x[end - 1], x[end], y[end - 1], y[end]
    xs.append(limit)
    ys.append(y0 + (y1 - y0) * (limit - x0) / (x1 - x0) if x1 > x0 else y1)
    xs, ys = np.array(xs), np.array(ys)
    return float(((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1]) / 2).sum() / limit)


class TestWorkedExample:
    """Bona fide 0..3 against attacks 1.5, 2.5, 4, 5."""

    @pytest.fixture
    def scores(self):
        return make_scores([0, 1, 2, 3], [1.5, 2.5, 4, 5])

    def test_det_curve(self, scores):
        curve = det_curve(scores)
        assert curve.points() == [
            (-np.inf, 0.0, 1.0), (1.0, 0.0, 0.75), (1.5, 0.0, 0.5), (2.0, 0.25, 0.5), (2.5, 0.25, 0.25),
            (3.0, 0.5, 0.25), (4.0, 0.5, 0.0), (5.0, 0.75, 0.0), (np.inf, 1.0, 0.0),
        ]

    def test_d_eer(self, scores):
        assert d_eer(scores) == (0.25, 2.5)

    def test_pauc(self, scores):
        assert pauc20(det_curve(scores)) == pytest.approx(0.5)

    def test_operating_points(self, scores):
        point = apcer_at_bpcer(scores, 0.25)
        assert (point.threshold, point.apcer, point.bpcer) == (2.5, 0.25, 0.25)
        point = apcer_at_bpcer(scores, 0.0)
        assert (point.threshold, point.apcer, point.bpcer) == (4.0, 0.5, 0.0)

    def test_decision_rule_at_threshold(self, scores):
        # Scores equal to the threshold count as attacks.
        assert apcer(scores, 2.5) == 0.25
        assert bpcer(scores, 3.0) == 0.25


class TestSmallFixtures:
    def test_counting(self):
        scores = make_scores([0.1, 0.3], [0.9, 0.8, 0.2])
        assert apcer(scores, 0.5) == pytest.approx(1 / 3)
        assert bpcer(scores, 0.5) == 0.0

    def test_interleaved_sets(self):
        scores = make_scores([1, 2, 3, 4], [3, 4, 5, 6])
        assert (0.25, 0.25) in set(zip(det_curve(scores).apcer.tolist(), det_curve(scores).bpcer.tolist()))
        assert d_eer(scores)[0] == 0.25
        assert apcer_at_bpcer(scores, 0.25).apcer == 0.25

    def test_pauc_by_hand(self):
        curve = DetCurve(thresholds=np.array([-np.inf, 0.0, 1.0]), apcer=np.array([0.0, 0.1, 0.2]),
                         bpcer=np.array([0.5, 0.5, 0.1]))
        assert pauc(curve, 0.2) == pytest.approx(0.40)

    @pytest.mark.parametrize("seed", range(20))
    def test_label_flip_mirrors_d_eer(self, seed):
        scores = random_scores(seed)
        flipped = make_scores(scores.attack_scores, scores.bonafide_scores)
        assert d_eer(flipped)[0] == pytest.approx(1.0 - d_eer(scores)[0], abs=1e-12)

    def test_fusion_arithmetic(self):
        a, b = make_scores([0.2], [0.9]), make_scores([0.6], [0.1])
        unit = NormalizationStats(0.0, 1.0)
        assert fuse(a, b, 0.5, unit, unit).scores[0] == pytest.approx(0.4)


class TestAgainstBruteForce:
    def test_rates(self, corpus):
        for scores in corpus:
            brute = Brute(scores)
            for t in brute.thresholds:
                assert (apcer(scores, t), bpcer(scores, t)) == brute.rates(t)

    def test_det_curve(self, corpus):
        for scores in corpus:
            brute = Brute(scores)
            curve = det_curve(scores)
            assert (curve.apcer[0], curve.bpcer[0]) == (0.0, 1.0)
            assert (curve.apcer[-1], curve.bpcer[-1]) == (1.0, 0.0)
            assert np.all(np.diff(curve.apcer) >= 0) and np.all(np.diff(curve.bpcer) <= 0)
            assert np.all(np.diff(curve.thresholds) > 0)
            for t, a, b in curve.points():
                assert (a, b) == brute.rates(t)
            assert set(brute.pairs()) == set(zip(curve.apcer.tolist(), curve.bpcer.tolist()))

    def test_d_eer_lies_between_the_straddling_points(self, corpus):
        for scores in corpus:
            eer, _ = d_eer(scores)
            pairs = Brute(scores).pairs()
            assert max(min(a, b) for a, b in pairs) - 1e-12 <= eer <= min(max(a, b) for a, b in pairs) + 1e-12

    @pytest.mark.parametrize("limit", [0.05, 0.2, 0.5, 1.0])
    def test_pauc(self, corpus, limit):
        for scores in corpus:
            curve = det_curve(scores)
            assert pauc(curve, limit) == pytest.approx(brute_pauc(curve, limit), abs=1e-12)

    @pytest.mark.parametrize("target", [0.0, 0.002, 0.01, 0.05, 0.2, 1.0])
    def test_apcer_at_bpcer(self, corpus, target):
        for scores in corpus:
            brute = Brute(scores)
            point = apcer_at_bpcer(scores, target)
            feasible = [t for t in brute.thresholds if brute.rates(t)[1] <= target]
            assert point.threshold == min(feasible)
            assert (point.apcer, point.bpcer) == brute.rates(point.threshold)


class TestInvariances:
    @pytest.mark.parametrize("transform", [
        lambda x: 2.0 * x + 1.0,
        np.exp,
        lambda x: x ** 3,
    ], ids=["affine", "exp", "cube"])
    def test_monotone_transform(self, corpus, transform):
        for scores in corpus:
            moved = scores.with_scores(transform(scores.scores))
            a, b = det_curve(scores), det_curve(moved)
            np.testing.assert_array_equal(a.apcer, b.apcer)
            np.testing.assert_array_equal(a.bpcer, b.bpcer)
            assert d_eer(scores)[0] == d_eer(moved)[0]
            assert pauc20(a) == pauc20(b)

    def test_perfect_separation(self):
        scores = make_scores([0.0, 1.0], [2.0, 3.0])
        eer, threshold = d_eer(scores)
        assert eer == 0.0 and 1.0 < threshold <= 2.0
        assert pauc20(det_curve(scores)) == 0.0
        assert apcer_at_bpcer(scores, 0.0).apcer == 0.0

    def test_reversed_separation(self):
        scores = make_scores([2.0, 3.0], [0.0, 1.0])
        assert d_eer(scores)[0] == 1.0
        assert pauc20(det_curve(scores)) == 1.0


class TestReport:
    def test_species_breakdown_and_missed_attacks(self):
        scores = make_scores([0, 1, 2], [0.5, 3, 4], species=["overlay", "fakefinger", "fakefinger"])
        assert species_apcer(scores, 2.0) == {"fakefinger": 0.0, "overlay": 1.0}
        assert worst_species(species_apcer(scores, 2.0)) == ("overlay", 1.0)
        assert missed_attacks(scores, 2.0) == [("p0", "overlay", 0.5)]

    def test_worst_species_ties_break_by_name(self):
        assert worst_species({"b": 0.5, "a": 0.5}) == ("a", 0.5)
        assert worst_species({}) == (None, 0.0)

    def test_evaluate(self):
        report = evaluate(random_scores(3), "demo")
        assert (report.n_bonafide, report.n_attack) == (30, 25)
        assert [p.target_bpcer for p in report.operating_points] == [0.002, 0.01, 0.05]
        assert 0.0 <= report.pauc20 <= 100.0
        assert report.apcer_at(0.01) == report.operating_points[1].apcer
        assert sum(report.missed_attacks.values()) == round(report.apcer_at(0.002) * 25)

    def test_report_json_keeps_infinite_thresholds(self):
        # Reversed classes: no finite threshold reaches BPCER 0.2%.
        report = evaluate(make_scores([2.0, 3.0], [0.0, 1.0]))
        assert report.operating_points[0].threshold == np.inf
        text = report.model_dump_json()
        assert "Infinity" in text
        assert type(report).model_validate_json(text) == report

    @pytest.mark.parametrize("bona,attack", [([0.0, 1.0], []), ([], [0.0, 1.0])])
    def test_single_class_is_rejected(self, bona, attack):
        with pytest.raises(DataContractError):
            evaluate(make_scores(bona, attack))

    @pytest.mark.parametrize("bad", [np.inf, -np.inf, np.nan])
    def test_non_finite_scores_are_rejected(self, bad):
        with pytest.raises(DataContractError, match="finite"):
            make_scores([0.1, bad], [0.5, 0.9])
        with pytest.raises(DataContractError):
            make_scores([0.1, 0.2], [0.5, 0.9]).with_scores(np.array([0.1, 0.2, bad, 0.9]))

    def test_zero_bpcer_falls_back_to_the_upper_sentinel(self):
        # The top score is bona fide: only +inf reaches BPCER 0.
        scores = make_scores([0.1, 5.0], [0.5, 0.9])
        point = apcer_at_bpcer(scores, 0.0)
        assert (point.threshold, point.apcer, point.bpcer) == (np.inf, 1.0, 0.0)
        assert missed_attacks(scores, point.threshold) == [("p0", "fakefinger", 0.5), ("p1", "fakefinger", 0.9)]

    def test_invalid_targets(self):
        scores = random_scores(0)
        with pytest.raises(UsageError):
            apcer_at_bpcer(scores, 1.5)
        with pytest.raises(UsageError):
            pauc(det_curve(scores), 0.0)


class TestFusion:
    def test_identical_sources_agree_at_every_weight(self):
        rng = np.random.default_rng(0)
        values = rng.permutation(40).astype(float)
        scores = make_scores(values[:20] - 5, values[20:])
        stats = NormalizationStats.of(scores)
        sweep = fusion_sweep(scores, scores, [0.0, 0.25, 0.5, 0.75, 1.0], stats, stats)
        baseline = evaluate(scores)
        assert sweep.stats_source == "reference"
        for entry in sweep.entries:
            assert entry.report.d_eer == baseline.d_eer
            assert entry.report.pauc20 == baseline.pauc20

    def test_weight_one_is_the_first_source(self):
        a = random_scores(1)
        b = a.with_scores(np.random.default_rng(2).normal(size=len(a)))
        stats_a, stats_b = NormalizationStats(-3.0, 3.0), NormalizationStats.of(b)
        fused = fuse(a, b.aligned_to(list(reversed(b.sample_ids))), 1.0, stats_a, stats_b)
        np.testing.assert_array_equal(fused.scores, stats_a.apply(a.scores))
        assert fused.sample_ids == a.sample_ids

    def test_normalization_clips_to_unit_range(self):
        stats = NormalizationStats(0.0, 2.0)
        np.testing.assert_array_equal(stats.apply(np.array([-1.0, 1.0, 5.0])), [0.0, 0.5, 1.0])

    def test_degenerate_source_contributes_constant(self):
        a = random_scores(4)
        b = a.with_scores(np.ones(len(a)))
        sweep = fusion_sweep(a, b, [0.5], NormalizationStats.of(a), NormalizationStats(1.0, 1.0))
        assert sweep.degenerate == ["b"]
        assert sweep.entries[0].report.d_eer == evaluate(a).d_eer

    def test_missing_references_fall_back_to_scored_ranges(self):
        a = random_scores(5)
        stats_a, stats_b, source = resolve_stats(a, a, NormalizationStats(0.0, 1.0), None)
        assert source == "scored"
        assert stats_a == NormalizationStats.of(a)
        assert fusion_sweep(a, a, [0.5]).stats_source == "scored"

    def test_missed_overlap(self):
        # At BPCER 0 the first source thresholds at 4 and misses p0, p1; the second at 0.9 misses p0.
        first = make_scores([0, 1, 3], [0.5, 2.5, 4], species=["a", "b", "b"])
        second = make_scores([0.1, 0.2, 0.5], [0.4, 0.9, 0.95], species=["a", "b", "b"])
        overlap = missed_overlap(first, second.aligned_to(list(reversed(second.sample_ids))),
                                 ("swir", "laser"), target_bpcer=0.0)
        assert overlap.missed == {"swir": ["p0", "p1"], "laser": ["p0"]}
        assert overlap.shared == ["p0"]
        assert overlap.first_shared == 0.5
        assert overlap.sources == ["swir", "laser"]

    def test_missed_overlap_without_first_misses(self):
        perfect = make_scores([0, 1], [2, 3])
        overlap = missed_overlap(perfect, make_scores([2, 3], [0, 1]), target_bpcer=0.0)
        assert overlap.missed["a"] == [] and overlap.missed["b"] == ["p0", "p1"]
        assert overlap.first_shared is None
        with pytest.raises(UsageError):
            missed_overlap(perfect, perfect, ("x", "x"))

    def test_mismatched_sets(self):
        a = make_scores([0.0, 1.0], [2.0])
        b = make_scores([0.0], [1.0, 2.0])
        stats = NormalizationStats(0.0, 2.0)
        with pytest.raises(DataContractError):
            fuse(a, b, 0.5, stats, stats)
        with pytest.raises(DataContractError):
            fuse(a, make_scores([0.0, 1.0, 2.0, 3.0], []), 0.5, stats, stats)
        with pytest.raises(UsageError):
            fuse(a, a, 1.5, stats, stats)


class TestCsv:
    def test_scores_are_bit_exact(self, tmp_path):
        scores = random_scores(7, rounding=15)
        scores.scores[0] = 1e-300
        scores.scores[1] = np.nextafter(1.0, 2.0)
        back = read_scores(write_scores(scores, tmp_path / "scores.csv"))
        assert back.sample_ids == scores.sample_ids and back.species == scores.species
        assert back.scores.tobytes() == scores.scores.tobytes()

    def test_det_keeps_infinite_sentinels(self, tmp_path):
        curve = det_curve(random_scores(8, rounding=15))
        back = read_det(write_det(curve, tmp_path / "det.csv"))
        assert back.thresholds.tobytes() == curve.thresholds.tobytes()
        assert back.apcer.tobytes() == curve.apcer.tobytes()

    def test_missing_score_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sample_id,label,species\nb0,bonafide,bonafide\n")
        with pytest.raises(FormatError):
            read_scores(path)
