"""Config parsing and the five report-bundle pipelines."""

import hashlib
import json
import os

import numpy as np
import pytest

from gazecomplex.embed import EmbeddingSet, write_embeddings
from gazecomplex.errors import AlignmentError, ConfigError
from gazecomplex.experiment import Bundle, parse_config, run_experiment


def corpus_text(n):
    """n parsed three-to-six-word sentences with varying shape."""
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
    blocks = []
    for i in range(n):
        length = 3 + i % 4
        lines = [f"# sent_id = x{i:03d}"]
        for j in range(1, length + 1):
            surface = words[(i + j) % len(words)]
            upos = "VERB" if j == 2 else "NOUN"
            head = 0 if j == 2 else 2
            deprel = "root" if j == 2 else "nsubj"
            lines.append(
                f"{j}\t{surface}\t{surface}\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def lexicon_text():
    return "".join(
        f"{w}\t{z}\n"
        for w, z in [("alpha", 6.1), ("beta", 3.2), ("gamma", 5.0),
                     ("delta", 2.8), ("epsilon", 4.4), ("zeta", 5.5)]
    )


def metrics_text(n, seed=0):
    rng = np.random.default_rng(seed)
    lines = ["sentence_id,fixation_count,total_fixation_duration,"
             "first_pass_duration,regression_duration"]
    for i in range(n):
        tfd = float(rng.uniform(300, 900))
        fpd = float(rng.uniform(100, tfd))
        rd = float(rng.uniform(0, tfd - fpd))
        lines.append(f"x{i:03d},{2 + i % 5},{tfd:.1f},{fpd:.1f},{rd:.1f}")
    return "\n".join(lines) + "\n"


def embeddings_text(ids, dim=6, seed=0, provenance="unit test"):
    rng = np.random.default_rng(seed)
    vectors = {sid: rng.normal(size=dim) for sid in ids}
    return write_embeddings(EmbeddingSet(dim=dim, vectors=vectors,
                                         provenance=provenance))


@pytest.fixture
def workdir(tmp_path):
    n = 12
    (tmp_path / "corpus.conllu").write_text(corpus_text(n))
    (tmp_path / "lexicon.tsv").write_text(lexicon_text())
    (tmp_path / "metrics.csv").write_text(metrics_text(n))
    ids = [f"x{i:03d}" for i in range(n)]
    (tmp_path / "emb.tsv").write_text(embeddings_text(ids, seed=1))
    (tmp_path / "emb_ft.tsv").write_text(embeddings_text(ids, seed=2))
    return tmp_path


class TestParseConfig:
    def test_comments_and_blanks_skipped(self):
        cfg = parse_config("# leading comment\n\npipeline = svr  # trailing\n")
        assert cfg == {"pipeline": "svr"}

    def test_value_may_contain_equals(self):
        cfg = parse_config("out_dir = runs/a=b\n")
        assert cfg["out_dir"] == "runs/a=b"

    def test_unknown_key_names_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("pipeline = svr\nbogus = 1\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("seed = 1\nseed = 2\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config("pipeline svr\n")


class TestSvrPipeline:
    CONFIG = (
        "pipeline = svr\n"
        "conllu = corpus.conllu\n"
        "lexicon = lexicon.tsv\n"
        "metrics = metrics.csv\n"
        "folds = 3\n"
        "seed = 0\n"
        "language = xx\n"
        "out_dir = out\n"
    )

    def test_bundle_contents(self, workdir):
        bundle = run_experiment(self.CONFIG, base_dir=str(workdir))
        assert bundle.files == ("correlation.csv", "manifest.json",
                                "profiles.csv", "scores.csv", "subsets.csv")
        scores = (workdir / "out" / "scores.csv").read_text().strip().split("\n")
        # header + (3 folds + oof) rows for each of the four metrics
        assert len(scores) == 1 + 4 * 4
        subsets = (workdir / "out" / "subsets.csv").read_text().strip().split("\n")
        assert len(subsets) == 1 + 4 * 4  # four groups per metric

    def test_manifest_records_config_hash(self, workdir):
        bundle = run_experiment(self.CONFIG, base_dir=str(workdir))
        manifest = json.loads((workdir / "out" / "manifest.json").read_text())
        expected = hashlib.sha256(self.CONFIG.encode()).hexdigest()
        assert manifest["config_sha256"] == expected
        assert manifest["pipeline"] == "svr"
        # the manifest lists the data outputs; it cannot list itself
        assert manifest["outputs"] == sorted(
            f for f in bundle.files if f != "manifest.json")

    def test_deterministic_apart_from_timestamp(self, workdir):
        cfg_b = self.CONFIG.replace("out_dir = out", "out_dir = out_b")
        run_experiment(self.CONFIG, base_dir=str(workdir))
        run_experiment(cfg_b, base_dir=str(workdir))
        for name in ("profiles.csv", "scores.csv", "subsets.csv", "correlation.csv"):
            assert (workdir / "out" / name).read_bytes() == \
                (workdir / "out_b" / name).read_bytes()
        a = json.loads((workdir / "out" / "manifest.json").read_text())
        b = json.loads((workdir / "out_b" / "manifest.json").read_text())
        a.pop("created_at"), b.pop("created_at")
        assert {k: v for k, v in a.items() if k != "config_sha256"} == \
            {k: v for k, v in b.items() if k != "config_sha256"}

    def test_missing_metrics_key(self, workdir):
        cfg = self.CONFIG.replace("metrics = metrics.csv\n", "")
        with pytest.raises(ConfigError, match="metrics"):
            run_experiment(cfg, base_dir=str(workdir))

    def test_missing_input_file(self, workdir):
        cfg = self.CONFIG.replace("corpus.conllu", "absent.conllu")
        with pytest.raises(ConfigError, match="absent.conllu"):
            run_experiment(cfg, base_dir=str(workdir))

    def test_unknown_pipeline(self, workdir):
        with pytest.raises(ConfigError, match="unknown pipeline"):
            run_experiment("pipeline = magic\nout_dir = out\n",
                           base_dir=str(workdir))

    def test_rollback_leaves_no_partial_bundle(self, workdir):
        # metrics whose ids never match the corpus: alignment fails after
        # profiles.csv would have been written
        (workdir / "bad_metrics.csv").write_text(metrics_text(3).replace("x0", "z0"))
        cfg = self.CONFIG.replace("metrics.csv", "bad_metrics.csv")
        with pytest.raises(AlignmentError):
            run_experiment(cfg, base_dir=str(workdir))
        out = workdir / "out"
        assert not out.exists() or list(out.iterdir()) == []


class TestBaselinePipeline:
    def test_baseline_rows(self, workdir):
        cfg = (
            "pipeline = baseline\n"
            "conllu = corpus.conllu\n"
            "lexicon = lexicon.tsv\n"
            "metrics = metrics.csv\n"
            "folds = 3\n"
            "seeds = 0,1\n"
            "out_dir = out\n"
        )
        bundle = run_experiment(cfg, base_dir=str(workdir))
        assert "baseline.csv" in bundle.files
        rows = (workdir / "out" / "baseline.csv").read_text().strip().split("\n")
        assert len(rows) == 1 + 2 * 4  # two seeds, four metrics
        assert bundle.manifest["seeds"] == [0, 1]


class TestHeadPipeline:
    def test_head_bundle(self, workdir):
        cfg = (
            "pipeline = head\n"
            "embeddings = emb.tsv\n"
            "metrics = metrics.csv\n"
            "folds = 3\n"
            "epochs = 2\n"
            "out_dir = out\n"
        )
        bundle = run_experiment(cfg, base_dir=str(workdir))
        assert bundle.files == ("head_loss.csv", "head_model.json",
                                "manifest.json", "scores.csv")
        model = json.loads((workdir / "out" / "head_model.json").read_text())
        assert model["tasks"] == ["fixation_count", "total_fixation_duration",
                                  "first_pass_duration", "regression_duration"]
        assert len(model["weights"]) == 4
        assert all(len(row) == model["input_dim"] for row in model["weights"])
        loss_lines = (workdir / "out" / "head_loss.csv").read_text().strip().split("\n")
        assert loss_lines[0] == "step,loss"
        assert loss_lines[1].startswith("0,")


class TestProbePipeline:
    def test_probe_bundle(self, workdir):
        cfg = (
            "pipeline = probe\n"
            "embeddings_pre = emb.tsv\n"
            "embeddings_ft = emb_ft.tsv\n"
            "conllu = corpus.conllu\n"
            "lexicon = lexicon.tsv\n"
            "folds = 3\n"
            "epochs = 2\n"
            "out_dir = out\n"
        )
        bundle = run_experiment(cfg, base_dir=str(workdir))
        assert "probe.csv" in bundle.files
        lines = (workdir / "out" / "probe.csv").read_text().strip().split("\n")
        assert lines[0] == "feature,r2_pre,r2_ft,delta,language"
        assert len(lines) == 1 + 9
        assert isinstance(bundle.manifest["excluded_features"], list)

    def test_profiles_csv_input_branch(self, workdir):
        svr_cfg = TestSvrPipeline.CONFIG.replace("out_dir = out", "out_dir = first")
        run_experiment(svr_cfg, base_dir=str(workdir))
        cfg = (
            "pipeline = probe\n"
            "embeddings_pre = emb.tsv\n"
            "embeddings_ft = emb_ft.tsv\n"
            "profiles = first/profiles.csv\n"
            "folds = 3\n"
            "epochs = 1\n"
            "out_dir = out\n"
        )
        bundle = run_experiment(cfg, base_dir=str(workdir))
        assert "probe.csv" in bundle.files


class TestScrambleEvalPipeline:
    def test_scramble_bundle(self, workdir):
        cfg = (
            "pipeline = scramble-eval\n"
            "conllu = corpus.conllu\n"
            "lexicon = lexicon.tsv\n"
            "scramble_seed = 7\n"
            "out_dir = out\n"
        )
        bundle = run_experiment(cfg, base_dir=str(workdir))
        assert bundle.files == ("manifest.json", "preservation.csv", "scrambled.txt")
        scrambled = (workdir / "out" / "scrambled.txt").read_text().strip().split("\n")
        assert len(scrambled) == 12
        assert all("\t" in line and "-scrambled" in line.split("\t")[0]
                   for line in scrambled)
        preservation = (workdir / "out" / "preservation.csv").read_text().strip().split("\n")
        assert preservation[0] == "sentence_id,scrambled_id,max_surface_feature_diff"
        assert all(line.endswith(",0.0") for line in preservation[1:])

    def test_scramble_determinism(self, workdir):
        cfg = (
            "pipeline = scramble-eval\n"
            "conllu = corpus.conllu\n"
            "lexicon = lexicon.tsv\n"
            "scramble_seed = 7\n"
            "out_dir = {}\n"
        )
        run_experiment(cfg.format("a"), base_dir=str(workdir))
        run_experiment(cfg.format("b"), base_dir=str(workdir))
        assert (workdir / "a" / "scrambled.txt").read_bytes() == \
            (workdir / "b" / "scrambled.txt").read_bytes()
