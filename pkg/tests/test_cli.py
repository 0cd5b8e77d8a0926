"""Tests for CLI argument parsing and the lightweight subcommands."""

import argparse
import io
import json

import pytest

from hierground.cli import build_parser, main, parse_seed_range


class TestCLIParsing:
    def setup_method(self):
        self.parser = build_parser()

    def test_command_is_required(self):
        with pytest.raises(SystemExit):
            self.parser.parse_args([])

    def test_global_options_precede_command(self):
        args = self.parser.parse_args(["-f", "json", "-d", "train"])
        assert args.format == "json"
        assert args.debug is True
        assert args.command == "train"
        assert args.config is None

    def test_eval_defaults(self):
        args = self.parser.parse_args(["eval", "--ckpt", "best.hgck"])
        assert args.split == "test"
        assert args.data is None
        assert args.csv is None
        assert args.config is None

    def test_eval_needs_checkpoint(self):
        with pytest.raises(SystemExit):
            self.parser.parse_args(["eval"])

    def test_ablate_defaults_to_three_seeds(self):
        args = self.parser.parse_args(["ablate"])
        assert args.seeds == 3
        assert args.no_acceptance is False
        assert args.strict is False

    def test_sweep_param_choices(self):
        args = self.parser.parse_args(["sweep", "--param", "hier_lambda", "--values", "1.5,2,4"])
        assert args.param == "hier_lambda"
        assert args.seeds == 1
        with pytest.raises(SystemExit):
            self.parser.parse_args(["sweep", "--param", "dim", "--values", "8"])

    def test_gen_data_seed_range(self):
        args = self.parser.parse_args(["gen-data", "--seeds", "3..5", "--out", "scenes"])
        assert list(args.seeds) == [3, 4, 5]
        assert args.split == "test"

    def test_viz_default_output(self):
        args = self.parser.parse_args(["viz", "--ckpt", "a.hgck", "--scene", "s.json"])
        assert args.out == "./viz"

    def test_chunk_is_uncapped_by_default(self):
        assert self.parser.parse_args(["chunk"]).max_phrases is None


class TestSeedRange:
    def test_single_seed(self):
        assert parse_seed_range("7") == range(7, 8)

    def test_inclusive_range(self):
        assert parse_seed_range("0..99") == range(0, 100)

    @pytest.mark.parametrize("text", ["a..b", "5..2", ""])
    def test_rejects_bad_ranges(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seed_range(text)


class TestMain:
    def test_chunk_prints_one_document_per_line(self, monkeypatch, capsys):
        monkeypatch.setattr("sys.stdin", io.StringIO("white and black cat laying on orange cat\n\nred square\n"))
        assert main(["chunk"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        first = json.loads(lines[0])
        assert [p["kind"] for p in first["phrases"]] == ["noun", "verb", "preposition", "noun"]
        assert first["masks"][0] == [1, 1, 1, 1, 0, 0, 0, 0]
        assert first["masks"][-1] == [1] * 8
        assert json.loads(lines[1])["masks"] == [[1, 1]]

    def test_chunk_respects_cap(self, monkeypatch, capsys):
        monkeypatch.setattr("sys.stdin", io.StringIO("red square left of blue circle above green triangle\n"))
        assert main(["chunk", "--max-phrases", "2"]) == 0
        document = json.loads(capsys.readouterr().out)
        assert len(document["masks"]) == 2

    def test_unknown_word_fails_with_message(self, monkeypatch, caplog):
        monkeypatch.setattr("sys.stdin", io.StringIO("red zebra\n"))
        assert main(["chunk"]) == 1
        assert "zebra" in caplog.text

    def test_gen_data_writes_manifest(self, tmp_path):
        assert main(["gen-data", "--seeds", "0..2", "--split", "val", "--out", str(tmp_path)]) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest == {"val": [0, 1, 2]}
        assert (tmp_path / "scene_2.ppm").exists()

    def test_missing_checkpoint_is_an_error(self, tmp_path, caplog):
        assert main(["eval", "--ckpt", str(tmp_path / "none.hgck")]) == 1
        assert "cannot read checkpoint" in caplog.text

    def test_bad_config_is_an_error(self, tmp_path, caplog):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"dim": 30, "heads": 4}))
        assert main(["train", "--config", str(path)]) == 1
        assert "divisible" in caplog.text

    def test_eval_config_must_match_checkpoint(self, tmp_path, caplog):
        from hierground.autodiff.checkpoint import save_checkpoint
        from hierground.config import RunConfig
        from hierground.model.grounding import GroundingModel

        small = RunConfig(dim=8, heads=2, visual_layers=1, text_layers=1, patch_size=8, image_size=16, iterations=1)
        ckpt = save_checkpoint(str(tmp_path / "best.hgck"), GroundingModel(small).state_dict(), small.to_dict())
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"dim": 16, "heads": 2, "patch_size": 8, "image_size": 16}))
        assert main(["eval", "--ckpt", ckpt, "--config", str(path)]) == 1
        assert "dimension mismatch" in caplog.text

    def test_strict_ablation_fails_on_missed_threshold(self, monkeypatch, caplog):
        from hierground.training.ablation import AblationTable
        from hierground.training.acceptance import AcceptanceCheck, AcceptanceReport

        table = AblationTable(acceptance=AcceptanceReport([AcceptanceCheck("full_minus_baseline", 0.01, 0.05)]))
        calls = []

        def fake_ablate(self, **kwargs):
            calls.append(kwargs)
            return table

        monkeypatch.setattr("hierground.grounder.HierGrounder.ablate", fake_ablate)
        assert main(["-f", "json", "ablate", "--strict"]) == 1
        assert "Acceptance failed: full_minus_baseline" in caplog.text
        assert main(["-f", "json", "ablate", "--no-acceptance"]) == 0
        assert [c["acceptance"] for c in calls] == [True, False]
