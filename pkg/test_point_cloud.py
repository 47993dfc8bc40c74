"""
Tests for point clouds, embeddings and distance matrices.
"""
import numpy as np
import pytest

from datasets import afro_cuban_rhythms, cmajor_frequencies, load_dataset
from errors import ConfigurationError, DimensionError, DomainError, MatrixFormatError
from metrics import ChordClass, CirclePoint, PitchTuple
from point_cloud import (
    DistanceMatrix,
    PointCloud,
    collapse_duplicates,
    default_metric_for,
    delay_embed,
    diameter_ratio,
    distance_matrix,
    embed_pitches,
    get_metric,
    merge_events,
)


def _ewe_matrix() -> DistanceMatrix:
    dataset = load_dataset("ewe")
    return distance_matrix(dataset.cloud, "necklace")


class TestDistanceMatrix:
    """Storage, access and the text interchange format."""

    def test_lower_triangle_access(self):
        matrix = DistanceMatrix(3, [0.5, 0.25, 0.125])
        assert matrix[1, 0] == 0.5
        assert matrix[0, 2] == 0.25
        assert matrix[2, 1] == 0.125
        assert matrix[1, 1] == 0.0
        assert matrix.max() == 0.5
        np.testing.assert_array_equal(matrix.to_dense(), matrix.to_dense().T)

    def test_to_text(self):
        assert DistanceMatrix(3, [0.5, 0.25, 0.125]).to_text() == "3\n0.5\n0.25 0.125\n"

    def test_text_round_trip_is_exact(self):
        matrix = _ewe_matrix()
        again = DistanceMatrix.from_text(matrix.to_text())
        np.testing.assert_array_equal(again.lower, matrix.lower)

    @pytest.mark.parametrize("text", [
        "",
        "x\n",
        "2\n1 2\n",
        "3\n0.5\n",
        "2\n-1\n",
        "2\nnan\n",
        "2\nabc\n",
    ])
    def test_malformed_text(self, text):
        with pytest.raises(MatrixFormatError):
            DistanceMatrix.from_text(text)

    def test_single_point(self):
        matrix = DistanceMatrix.from_text("1\n")
        assert matrix.size == 1
        assert matrix.max() == 0.0

    def test_wrong_triangle_size(self):
        with pytest.raises(DimensionError):
            DistanceMatrix(3, [1.0, 2.0])

    def test_asymmetric_dense(self):
        with pytest.raises(DomainError):
            DistanceMatrix.from_dense([[0, 1], [2, 0]])

    def test_read_only(self):
        matrix = DistanceMatrix(2, [1.0])
        with pytest.raises(ValueError):
            matrix.lower[0] = 2.0

    def test_nearest_neighbors(self):
        np.testing.assert_allclose(_ewe_matrix().nearest_neighbor_distances(),
                                   [1 / 12, 2 / 12, 1 / 12, 1 / 12, 2 / 12, 2 / 12, 1 / 12])

    def test_permuted(self):
        matrix = DistanceMatrix(3, [0.5, 0.25, 0.125], ["a", "b", "c"])
        permuted = matrix.permuted([2, 0, 1])
        assert permuted.labels == ("c", "a", "b")
        assert permuted[0, 1] == matrix[2, 0]
        assert permuted[1, 2] == matrix[0, 1]


class TestEmbedding:
    def test_delay_embed(self):
        assert delay_embed([1, 2, 3, 4], 2) == [(1, 2), (2, 3), (3, 4)]
        assert delay_embed([1, 2, 3], 3) == [(1, 2, 3)]

    @pytest.mark.parametrize("d", [0, 5])
    def test_delay_embed_bounds(self, d):
        with pytest.raises(DimensionError):
            delay_embed([1, 2, 3, 4], d)

    def test_embed_pitches(self):
        pitches = [CirclePoint(k / 12) for k in (0, 4, 7, 0)]
        tuples = embed_pitches(pitches, 3)
        assert len(tuples) == 2
        assert tuples[1] == PitchTuple.of(4 / 12, 7 / 12, 0.0)


class TestDistanceMatrixAssembly:
    """Distance matrices from clouds under registered metrics."""

    def test_ewe_values(self):
        matrix = _ewe_matrix()
        assert matrix.size == 7
        assert matrix.max() == pytest.approx(0.5)
        assert matrix[3, 2] == pytest.approx(1 / 12)

    def test_circle_of_fifths_neighbours(self):
        matrix = distance_matrix(load_dataset("circle-of-fifths").cloud, "chord-class")
        for i in range(12):
            assert matrix[i, (i + 1) % 12] == pytest.approx(1 / 12, abs=1e-9)
        assert matrix.max() == pytest.approx(0.5, abs=1e-9)

    def test_threads_do_not_change_values(self):
        cloud = load_dataset("circle-of-fifths").cloud
        sequential = distance_matrix(cloud, "chord-class", threads=1)
        pooled = distance_matrix(cloud, "chord-class", threads=8)
        assert sequential.to_text() == pooled.to_text()

    def test_unknown_metric(self):
        with pytest.raises(ConfigurationError):
            distance_matrix(PointCloud((CirclePoint(0.0),)), "euclidean")

    def test_payload_mismatch(self):
        with pytest.raises(ConfigurationError):
            distance_matrix(PointCloud((CirclePoint(0.0), CirclePoint(0.5))), "chord-class")

    def test_default_metrics(self):
        assert default_metric_for(CirclePoint(0.0)) == "necklace"
        assert default_metric_for(ChordClass.of(0.0)) == "chord-class"
        assert default_metric_for(440.0) == "pitch-class"
        assert default_metric_for((ChordClass.of(0.0),)) == "tde-chord"
        with pytest.raises(ConfigurationError):
            default_metric_for("C4")

    def test_registry_flags_pseudo_metrics(self):
        assert not get_metric("pitch-class").is_metric
        assert get_metric("chord-class").is_metric


class TestAfroCubanDistances:
    """The six 16-pulse timelines."""

    def _matrix(self, metric):
        rhythms = afro_cuban_rhythms()
        return distance_matrix(PointCloud(tuple(rhythms.values()), tuple(rhythms)), metric)

    @pytest.mark.parametrize("metric", ["rhythm", "rhythm-index"])
    def test_extremes(self, metric):
        matrix = self._matrix(metric)
        assert matrix.max() == pytest.approx(0.1875, abs=1e-9)
        nearest = matrix.nearest_neighbor_distances()
        assert nearest[nearest > 0].min() == pytest.approx(0.0625, abs=1e-9)

    def test_index_alignment_is_a_tree_metric(self):
        # son is one step from bossa-nova, rumba, shiko and soukous; gahu hangs off bossa-nova
        matrix = self._matrix("rhythm-index")
        names = list(afro_cuban_rhythms())
        step = {(a, b): matrix[names.index(a), names.index(b)] for a in names for b in names}
        for other in ("bossa-nova", "rumba", "shiko", "soukous"):
            assert step[("son", other)] == pytest.approx(0.0625)
        assert step[("gahu", "bossa-nova")] == pytest.approx(0.0625)
        assert step[("gahu", "rumba")] == pytest.approx(0.1875)


class TestDuplicates:
    """Collapsing coincident points and counting merges."""

    def test_octave_pair_collapses(self):
        labels = ("C", "D", "E", "F", "G", "A", "B", "C'")
        cloud = collapse_duplicates(PointCloud(tuple(cmajor_frequencies()), labels), metric="pitch-class")
        assert len(cloud) == 7
        assert cloud.labels[0] == "C/C'"
        assert cloud.multiplicities == (2, 1, 1, 1, 1, 1, 1)

    def test_negative_tolerance(self):
        with pytest.raises(DomainError):
            collapse_duplicates(PointCloud((CirclePoint(0.0),)), tolerance=-1.0)

    def test_merge_events(self):
        events = merge_events(_ewe_matrix())
        assert [count for _, count in events] == [2, 4]
        assert events[0][0] == pytest.approx(1 / 12, abs=1e-9)
        assert events[1][0] == pytest.approx(2 / 12, abs=1e-9)

    def test_merge_events_count_multiplicities(self):
        matrix = DistanceMatrix(2, [0.25])
        assert merge_events(matrix, multiplicities=(2, 1)) == [(0.0, 1), (0.25, 1)]

    def test_diameter_ratio(self):
        assert diameter_ratio(_ewe_matrix(), 0.5) == pytest.approx(1.0)
        with pytest.raises(DomainError):
            diameter_ratio(_ewe_matrix(), 0.0)


class TestDatasetSizes:
    """Point counts of the worked examples once coincident points merge."""

    @pytest.mark.parametrize("name, size", [
        ("ewe", 7),
        ("cmajor-scale", 7),
        ("circle-of-fifths", 12),
        ("afro-cuban", 6),
        ("clave-son", 5),
    ])
    def test_collapsed_size(self, name, size):
        dataset = load_dataset(name)
        assert len(collapse_duplicates(dataset.cloud, metric=dataset.metric)) == size

    def test_cmajor_scale_loads_the_octave(self):
        assert load_dataset("cmajor-scale").size == 8
