"""
Tests for the analysis pipeline and the command line.
"""
import json

import pytest

from barcode_render import render_summary
from datasets import load_dataset
from errors import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_PARSE, ConfigurationError, DatasetNotFoundError
from midi_ingest import build_score, write_midi
from music_tda import main, make_config, run
from persistence import FieldSensitivity, Interval, barcode_from_json
from point_cloud import distance_matrix


@pytest.fixture
def triad_midi(tmp_path):
    """Three block triads on track 1, one per beat."""
    notes = [(beat, 1, key, 1) for beat, chord in enumerate([(60, 64, 67), (62, 65, 69), (64, 67, 71)])
             for key in chord]
    path = tmp_path / "triads.mid"
    path.write_bytes(write_midi(build_score(notes)))
    return path


@pytest.fixture
def ragged_midi(tmp_path):
    """A triad followed by a dyad."""
    notes = [(0, 1, key, 1) for key in (60, 64, 67)] + [(1, 1, key, 1) for key in (62, 65)]
    path = tmp_path / "ragged.mid"
    path.write_bytes(write_midi(build_score(notes)))
    return path


class TestConfig:
    """Validation of analysis options."""

    def test_defaults(self):
        config = make_config(input="ewe")
        assert config.format == "text"
        assert config.delay == 1

    @pytest.mark.parametrize("options", [
        {"field": 4},
        {"max_dim": -1},
        {"delay": 0},
        {"format": "png"},
        {"metric": "euclidean"},
        {"window": (0.4, 0.2)},
        {"mode": "melody", "metric": "chord-class"},
        {"mode": "matrix", "metric": "necklace"},
        {"cycle": "0"},
    ])
    def test_invalid(self, options):
        with pytest.raises(ConfigurationError):
            make_config(input="ewe", **options)

    def test_environment_settings(self, monkeypatch):
        monkeypatch.setenv("MUSIC_TDA_FIELD", "4")
        with pytest.raises(ConfigurationError):
            run(make_config(input="square"))


class TestRun:
    """End-to-end runs on built-in datasets and files."""

    def test_ewe_matches_the_circle(self):
        result = run(make_config(input="ewe"))
        assert result.comparison is not None and result.comparison.match
        assert result.fill_ratio == pytest.approx(1.0)
        assert result.merges[0][1] == 2

    def test_cmajor_scale_collapses_the_octave(self):
        result = run(make_config(input="cmajor-scale"))
        assert result.matrix.size == 7
        assert result.comparison.match

    def test_keep_duplicates(self):
        result = run(make_config(input="cmajor-scale", keep_duplicates=True))
        assert result.matrix.size == 8
        assert result.merges[0] == (0.0, 1)

    def test_circle_of_fifths_is_thread_independent(self):
        single = run(make_config(input="circle-of-fifths", threads=1))
        pooled = run(make_config(input="circle-of-fifths", threads=8))
        assert single.barcode_json == pooled.barcode_json
        assert single.comparison.match

    def test_afro_cuban_alignment(self):
        index = run(make_config(input="afro-cuban"))
        assert not index.barcode.in_dimension(1)
        anchored = run(make_config(input="afro-cuban", rhythm_alignment="anchored"))
        assert anchored.matrix.max() == pytest.approx(0.1875)

    def test_alignment_needs_a_rhythm_metric(self):
        with pytest.raises(ConfigurationError):
            run(make_config(input="ewe", rhythm_alignment="index"))

    def test_unknown_input(self):
        with pytest.raises(DatasetNotFoundError):
            run(make_config(input="no-such-thing"))

    def test_compare_space_needs_window(self):
        with pytest.raises(ConfigurationError):
            run(make_config(input="afro-cuban", compare_space="circle"))

    def test_explicit_comparison(self):
        result = run(make_config(input="square", compare_space="sphere:2", window=(1.0, 1.4)))
        assert not result.comparison.match

    def test_midi_chords(self, triad_midi):
        result = run(make_config(input=str(triad_midi), mode="chords"))
        assert result.matrix.size == 3
        assert result.matrix[1, 0] == pytest.approx(5 / 12)

    def test_midi_melody_delay(self, triad_midi):
        result = run(make_config(input=str(triad_midi), mode="melody", delay=2))
        assert result.matrix.size == 7

    def test_matrix_file(self, tmp_path):
        path = tmp_path / "triangle.txt"
        path.write_text("3\n1\n1 1\n")
        result = run(make_config(input=str(path)))
        assert [bar.death for bar in result.barcode.in_dimension(0)].count(1.0) == 2
        assert not result.barcode.in_dimension(1)
        assert result.metric is None

    def test_records_the_metric(self):
        assert run(make_config(input="ewe")).metric == "necklace"
        assert run(make_config(input="circle-of-fifths")).metric == "chord-class"

    def test_ragged_chords_use_hausdorff(self, ragged_midi):
        result = run(make_config(input=str(ragged_midi), mode="chords"))
        assert result.metric == "hausdorff"
        assert "Metric: hausdorff" in result.summary()

    def test_top_dimension_is_kept_out_of_the_bars(self):
        result = run(make_config(input="circle-of-fifths"))
        assert result.barcode.max_dim == 2
        assert not result.barcode.in_dimension(3)
        assert result.barcode.capped_dim == 3
        summary = result.summary()
        assert "H3: computed under cap" in summary
        assert "  H3 [" not in summary
        assert json.loads(result.barcode_json)["dimensions"] == [0, 1, 2]

    def test_fields_agree_on_the_circle(self):
        result = run(make_config(input="ewe"))
        assert result.sensitivity is not None and result.sensitivity.agree
        assert "Field sensitivity" not in result.summary()

    def test_chorale_chords(self, fixtures_dir):
        result = run(make_config(input=str(fixtures_dir / "chorale.mid"), mode="chords"))
        assert result.matrix.size == 3
        assert result.metric == "chord-class"

    def test_circle_of_fifths_file_matches_the_dataset(self, fixtures_dir):
        result = run(make_config(input=str(fixtures_dir / "circle_of_fifths.mid"), mode="chords"))
        dataset = load_dataset("circle-of-fifths")
        expected = distance_matrix(dataset.cloud, dataset.metric)
        assert result.matrix.size == 12
        for i in range(12):
            for j in range(12):
                assert result.matrix[i, j] == pytest.approx(expected[i, j])
        assert result.comparison is None


class TestSummary:
    """Text rendering of a run."""

    def test_prints_bars_that_depend_on_the_field(self):
        result = run(make_config(input="square"))
        torsion = FieldSensitivity((Interval(1, 0.5, 0.8),), ())
        text = render_summary(result.barcode, result.matrix, "square", result.merges, sensitivity=torsion)
        assert "Field sensitivity: GF(2) and GF(3) barcodes differ" in text
        assert "only over GF(2): H1" in text
        assert "only over GF(3)" not in text

    def test_matrix_input_has_no_metric(self):
        assert "Metric: distance matrix" in run(make_config(input="square")).summary()


class TestMain:
    """Exit codes and output of the command line."""

    def test_datasets(self, capsys):
        assert main(["datasets"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "ewe" in out and "circle-of-fifths" in out

    def test_json_output(self, capsys):
        assert main(["run", "square", "--format", "json"]) == EXIT_OK
        barcode = barcode_from_json(capsys.readouterr().out)
        assert len(barcode.in_dimension(1)) == 1

    def test_svg_has_one_element_per_bar(self, capsys):
        assert main(["run", "square", "--format", "svg"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.lstrip().startswith("<?xml")
        assert out.count('id="bar-') == 5

    def test_svg_is_deterministic(self, capsys):
        main(["run", "equilateral", "--format", "svg"])
        first = capsys.readouterr().out
        main(["run", "equilateral", "--format", "svg"])
        assert capsys.readouterr().out == first

    def test_text_summary_and_files(self, tmp_path, capsys):
        json_path, svg_path = tmp_path / "ewe.json", tmp_path / "ewe.svg"
        assert main(["run", "ewe", "--json", str(json_path), "--svg", str(svg_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Comparison with S^1" in out
        assert json.loads(json_path.read_text())["field"] == 2
        assert svg_path.read_text().count('id="bar-1-') >= 1

    def test_matrix_command(self, capsys):
        assert main(["matrix", "equilateral"]) == EXIT_OK
        assert capsys.readouterr().out == "3\n1\n1 1\n"

    def test_theory_command(self, capsys):
        assert main(["theory", "symm-z4-4", "--json"]) == EXIT_OK
        table = json.loads(capsys.readouterr().out)
        assert table["homology"] == ["Z", "Z", "Z + Z2", "Z + Z2", "0"]

    def test_unknown_dataset(self, capsys):
        assert main(["run", "no-such-dataset"]) == EXIT_CONFIG
        assert capsys.readouterr().err.startswith("Error:")

    def test_non_prime_field(self):
        assert main(["run", "ewe", "--field", "4"]) == EXIT_CONFIG

    def test_unknown_space(self):
        assert main(["theory", "klein-bottle"]) == EXIT_CONFIG

    def test_bad_window(self):
        assert main(["run", "ewe", "--window", "0.2"]) == EXIT_CONFIG

    def test_unreadable_midi(self, tmp_path):
        path = tmp_path / "broken.mid"
        path.write_bytes(b"not a midi file")
        assert main(["run", str(path)]) == EXIT_PARSE

    def test_empty_selection(self, triad_midi):
        assert main(["run", str(triad_midi), "--tracks", "5"]) == EXIT_DATA

    def test_empty_chord_selection(self, triad_midi):
        assert main(["run", str(triad_midi), "--mode", "chords", "--tracks", "5"]) == EXIT_DATA
