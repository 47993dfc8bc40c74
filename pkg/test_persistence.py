"""
Tests for persistence barcodes, the rank oracle and the consistency checks.
"""
import json
import math

import numpy as np
import pytest

from config import reset_settings
from datasets import load_dataset
from errors import ConfigurationError, MatrixFormatError, SizeError
from metrics import ChordClass, CirclePoint, PitchTuple, RhythmPattern
from persistence import (
    Barcode,
    Interval,
    barcode_from_json,
    barcode_to_dict,
    barcode_to_json,
    betti_at,
    betti_profile,
    euler_check,
    field_sensitivity,
    oracle_betti,
    pairing_conservation,
    rank_mod_p,
    reduce,
    reduce_pairs,
)
from point_cloud import PointCloud, collapse_duplicates, distance_matrix
from rips import build_rips


def _dataset_matrix(name):
    dataset = load_dataset(name)
    if dataset.cloud is None:
        return dataset.matrix
    return distance_matrix(collapse_duplicates(dataset.cloud, metric=dataset.metric), dataset.metric)


def _barcode(name, p=2):
    return reduce(build_rips(_dataset_matrix(name)), p)


def _random_cloud(metric, rng):
    n = int(rng.integers(2, 9))
    if metric == "necklace":
        points = [CirclePoint(x) for x in rng.random(n)]
    elif metric == "chord-class":
        points = [ChordClass(tuple(rng.random(3))) for _ in range(n)]
    elif metric == "tuple":
        points = [PitchTuple(tuple(rng.random(2))) for _ in range(n)]
    else:
        points = [RhythmPattern(tuple(rng.random(4))) for _ in range(n)]
    return PointCloud(tuple(points))


class TestIntervals:
    def test_half_open(self):
        bar = Interval(1, 0.25, 0.5)
        assert bar.contains(0.25)
        assert not bar.contains(0.5)
        assert not bar.is_infinite
        assert Interval(0, 0.0).is_infinite

    def test_profile_beyond_top_dimension(self):
        barcode = Barcode((Interval(0, 0.0),), max_dim=1)
        profile = betti_profile(barcode, 1.0)
        assert profile.counts == (1, 0)
        assert profile[5] == 0


class TestKnownBarcodes:
    """Worked examples with hand-checked bars."""

    def test_ewe(self):
        barcode = _barcode("ewe")
        zero = barcode.in_dimension(0)
        assert len(zero) == 7
        assert sum(bar.is_infinite for bar in zero) == 1
        deaths = sorted(bar.death for bar in zero if not bar.is_infinite)
        assert deaths == pytest.approx([1 / 12] * 2 + [2 / 12] * 4)
        (loop,) = barcode.in_dimension(1)
        assert loop.birth == pytest.approx(2 / 12, abs=1e-9)
        assert 0.398 <= loop.death <= 0.418

    def test_ewe_betti_numbers(self):
        barcode = _barcode("ewe")
        assert betti_at(barcode, 0.25, 0) == 1
        assert betti_at(barcode, 0.25, 1) == 1
        assert betti_at(barcode, 0.45, 1) == 0
        assert betti_at(barcode, 0.1, 0) == 5

    def test_cmajor_scale_is_a_circle(self):
        barcode = _barcode("cmajor-scale")
        assert len(barcode.in_dimension(0)) == 7
        deaths = sorted(bar.death for bar in barcode.in_dimension(0) if not bar.is_infinite)
        assert deaths == pytest.approx([1 / 12] * 2 + [2 / 12] * 4, abs=1e-9)
        loop = max(barcode.in_dimension(1), key=lambda bar: bar.death - bar.birth)
        assert 0.38 <= loop.death <= 0.42

    def test_circle_of_fifths(self):
        barcode = _barcode("circle-of-fifths")
        loop = max(barcode.in_dimension(1), key=lambda bar: bar.death - bar.birth)
        assert loop.birth == pytest.approx(1 / 12, abs=1e-9)
        assert loop.death == pytest.approx(4 / 12, abs=1e-9)
        assert betti_at(barcode, 0.35, 1) == 0
        assert betti_at(barcode, 0.35, 2) == 3

    def test_square(self):
        barcode = _barcode("square")
        assert barcode.in_dimension(1) == [Interval(1, 1.0, math.sqrt(2.0))]

    def test_rotations_share_a_barcode(self):
        ewe = _barcode("ewe").intervals
        for name in ("yoruba", "bemba"):
            other = _barcode(name).intervals
            assert len(other) == len(ewe)
            for a, b in zip(ewe, other):
                assert a.dim == b.dim
                assert a.birth == pytest.approx(b.birth, abs=1e-9)
                assert a.death == pytest.approx(b.death, abs=1e-9)

    def test_tree_metric_has_no_loops(self):
        barcode = _barcode("afro-cuban")
        assert all(bar.dim == 0 for bar in barcode.intervals)
        assert all(bar.dim == 3 for bar in barcode.capped)

    def test_non_prime_field(self):
        with pytest.raises(ConfigurationError):
            _barcode("square", p=4)


class TestDimensionCap:
    """Classes born in the top simplex dimension stay out of the bars."""

    def test_top_dimension_is_kept_apart(self):
        barcode = _barcode("circle-of-fifths")
        assert barcode.max_dim == 2
        assert max(bar.dim for bar in barcode.intervals) <= 2
        assert barcode.capped and barcode.capped_dim == 3
        assert all(bar.is_infinite for bar in barcode.capped)
        assert barcode_from_json(barcode_to_json(barcode)).capped == ()

    def test_raising_the_cap_makes_h3_exact(self):
        complex_ = build_rips(_dataset_matrix("afro-cuban"), max_dim=4)
        barcode = reduce(complex_)
        assert barcode.max_dim == 3
        assert barcode.in_dimension(3) == []
        assert all(bar.dim == 4 for bar in barcode.capped)

    def test_one_dimensional_cap(self):
        barcode = reduce(build_rips(load_dataset("square").matrix, max_dim=1))
        assert barcode.max_dim == 0
        assert barcode.in_dimension(1) == []
        assert [bar.birth for bar in barcode.capped] == pytest.approx([1.0, math.sqrt(2.0), math.sqrt(2.0)])

    def test_vertices_only(self):
        barcode = reduce(build_rips(load_dataset("equilateral").matrix, max_dim=0))
        assert len(barcode.in_dimension(0)) == 3
        assert barcode.capped == ()


class TestOracle:
    """Dense ranks of the full clique complex."""

    def test_rank_mod_p(self):
        assert rank_mod_p(np.array([[1, 1], [1, 1]]), 2) == 1
        assert rank_mod_p(np.array([[2, 0], [0, 2]]), 2) == 0
        assert rank_mod_p(np.array([[2, 0], [0, 2]]), 3) == 2
        assert rank_mod_p(np.zeros((0, 3)), 2) == 0

    def test_square_and_triangle(self):
        assert oracle_betti(load_dataset("square").matrix, 1.2, 1) == 1
        assert oracle_betti(load_dataset("square").matrix, 1.5, 1) == 0
        assert oracle_betti(load_dataset("equilateral").matrix, 1.0, 1) == 0
        assert oracle_betti(load_dataset("equilateral").matrix, 0.5, 0) == 3

    def test_circle_of_fifths(self):
        matrix = _dataset_matrix("circle-of-fifths")
        assert oracle_betti(matrix, 0.35, 1) == 0
        assert oracle_betti(matrix, 0.35, 2) == 3

    def test_size_limit(self, monkeypatch):
        matrix = _dataset_matrix("ewe")
        with pytest.raises(SizeError):
            oracle_betti(matrix, 0.2, 1, max_points=5)
        monkeypatch.setenv("MUSIC_TDA_ORACLE_MAX_POINTS", "6")
        reset_settings()
        with pytest.raises(SizeError):
            oracle_betti(matrix, 0.2, 1)

    def test_non_prime_field(self):
        with pytest.raises(ConfigurationError):
            oracle_betti(load_dataset("square").matrix, 1.0, 1, p=6)

    @pytest.mark.parametrize("metric", ["necklace", "chord-class", "tuple", "rhythm-index"])
    def test_barcode_agrees_with_oracle(self, metric, rng):
        for _ in range(50):
            matrix = distance_matrix(_random_cloud(metric, rng), metric)
            complex_ = build_rips(matrix)
            barcode = reduce(complex_)
            for eps in rng.uniform(0.0, matrix.max(), 5):
                for dim in (0, 1, 2):
                    assert betti_at(barcode, eps, dim) == oracle_betti(matrix, eps, dim)
                assert euler_check(complex_, barcode, eps) is not False


class TestConsistency:
    """Euler characteristic, pairing bookkeeping and relabelling."""

    def test_euler_examples(self):
        for name, eps in (("ewe", 0.3), ("square", 1.2), ("equilateral", 1.0)):
            complex_ = build_rips(_dataset_matrix(name))
            assert euler_check(complex_, reduce(complex_), eps) is True

    def test_euler_inconclusive_with_top_class(self):
        complex_ = build_rips(load_dataset("square").matrix, max_dim=1)
        assert euler_check(complex_, reduce(complex_), 1.2) is None

    def test_euler_never_fails(self, rng):
        for _ in range(30):
            matrix = distance_matrix(_random_cloud("necklace", rng), "necklace")
            complex_ = build_rips(matrix, max_dim=2)
            barcode = reduce(complex_)
            for eps in rng.uniform(0.0, matrix.max(), 4):
                assert euler_check(complex_, barcode, eps) is not False

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_pairing_conservation(self, p):
        complex_ = build_rips(_dataset_matrix("circle-of-fifths"))
        assert pairing_conservation(complex_, reduce_pairs(complex_, p))

    def test_relabel_invariance(self, rng):
        matrix = _dataset_matrix("ewe")
        order = [int(i) for i in rng.permutation(matrix.size)]
        original = reduce(build_rips(matrix))
        relabelled = reduce(build_rips(matrix.permuted(order)))
        assert relabelled.intervals == original.intervals

    def test_fields_agree_without_torsion(self):
        report = field_sensitivity(build_rips(_dataset_matrix("ewe")))
        assert report.agree
        assert report.only_in_gf2 == () and report.only_in_gf3 == ()


class TestJson:
    """The barcode interchange schema."""

    def test_schema(self):
        data = json.loads(barcode_to_json(_barcode("square")))
        assert set(data) == {"field", "eps_max", "dimensions"}
        assert data["field"] == 2
        assert [entry["dim"] for entry in data["dimensions"]] == [0, 1, 2]
        assert {"birth": 0.0, "death": None} in data["dimensions"][0]["bars"]
        assert data["dimensions"][1]["bars"] == [{"birth": 1.0, "death": math.sqrt(2.0)}]

    def test_round_trip(self):
        barcode = _barcode("ewe")
        assert barcode_from_json(barcode_to_json(barcode)) == barcode

    def test_dict_matches_json(self):
        barcode = _barcode("square")
        assert json.loads(barcode_to_json(barcode)) == barcode_to_dict(barcode)

    def test_deterministic_output(self):
        assert barcode_to_json(_barcode("circle-of-fifths")) == barcode_to_json(_barcode("circle-of-fifths"))

    @pytest.mark.parametrize("text", ["not json", "{}", '{"field": 2, "eps_max": 1, "dimensions": [{"dim": 0}]}'])
    def test_malformed(self, text):
        with pytest.raises(MatrixFormatError):
            barcode_from_json(text)
