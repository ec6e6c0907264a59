"""Probing: target assembly, the frozen-encoder contract, and delta behavior."""

import numpy as np
import pytest

from gazecomplex.complexity import FEATURE_NAMES, ComplexityProfile
from gazecomplex.embed import EmbeddingSet
from gazecomplex.errors import AlignmentError, DegenerateInputError
from gazecomplex.probe import (
    ProbeReport,
    probe_report_to_csv,
    probe_targets,
    run_probe,
)


def make_profile(sid, **overrides):
    values = dict(
        sentence_id=sid,
        sentence_length=8,
        avg_word_length=4.0,
        avg_word_frequency=5.0,
        n_low_frequency_words=1,
        lexical_density=0.5,
        parse_tree_depth=3,
        avg_dep_link_length=1.5,
        max_dep_link_length=3,
        n_verbal_heads=1,
    )
    values.update(overrides)
    return ComplexityProfile(**values)


def embedding_set(ids, dim, rng, provenance="test"):
    return EmbeddingSet(
        dim=dim,
        vectors={sid: rng.normal(size=dim) for sid in ids},
        provenance=provenance,
    )


class TestProbeTargets:
    def test_zscore_matches_hand_example(self):
        # one feature varying as [10, 14, 10]: mean 34/3, population std
        # sqrt(32)/3, giving [-1/sqrt(2), sqrt(2), -1/sqrt(2)]
        profiles = [
            make_profile("a", sentence_length=10),
            make_profile("b", sentence_length=14),
            make_profile("c", sentence_length=10),
        ]
        targets = probe_targets(profiles)
        col = targets.matrix[:, FEATURE_NAMES.index("sentence_length")]
        np.testing.assert_allclose(col, [-0.70710678, 1.41421356, -0.70710678])

    def test_constant_columns_flagged_and_zeroed(self):
        profiles = [make_profile(f"s{i}", sentence_length=5 + i) for i in range(4)]
        targets = probe_targets(profiles)
        assert "sentence_length" not in targets.constant_features
        assert "lexical_density" in targets.constant_features
        col = targets.matrix[:, FEATURE_NAMES.index("lexical_density")]
        np.testing.assert_array_equal(col, np.zeros(4))

    def test_unstandardized_keeps_raw_values(self):
        profiles = [make_profile("a", parse_tree_depth=2),
                    make_profile("b", parse_tree_depth=6)]
        targets = probe_targets(profiles, standardize=False)
        col = targets.matrix[:, FEATURE_NAMES.index("parse_tree_depth")]
        np.testing.assert_array_equal(col, [2.0, 6.0])

    def test_canonical_column_order(self):
        targets = probe_targets([make_profile("a")], standardize=False)
        assert targets.feature_names == FEATURE_NAMES
        assert targets.matrix.shape == (1, 9)

    def test_empty_rejected(self):
        with pytest.raises(DegenerateInputError):
            probe_targets([])


class TestRunProbe:
    def make_corpus(self, n, seed=0):
        rng = np.random.default_rng(seed)
        profiles = [
            make_profile(
                f"s{i:04d}",
                sentence_length=int(rng.integers(3, 40)),
                avg_word_length=float(rng.uniform(3, 9)),
                parse_tree_depth=int(rng.integers(2, 9)),
            )
            for i in range(n)
        ]
        return profiles, rng

    def test_identical_sets_give_delta_exactly_zero(self):
        profiles, rng = self.make_corpus(60)
        ids = [p.sentence_id for p in profiles]
        emb = embedding_set(ids, 8, rng)
        twin = EmbeddingSet(dim=8, vectors={k: v.copy() for k, v in emb.vectors.items()},
                            provenance="twin")
        report = run_probe(emb, twin, profiles, k=3, epochs=2)
        for result in report.results:
            assert result.delta == 0.0
            assert result.r2_pretrained == result.r2_finetuned

    def test_embeddings_never_mutated(self):
        profiles, rng = self.make_corpus(40)
        ids = [p.sentence_id for p in profiles]
        emb_pre = embedding_set(ids, 6, rng)
        emb_ft = embedding_set(ids, 6, rng)
        before_pre = {k: v.tobytes() for k, v in emb_pre.vectors.items()}
        before_ft = {k: v.tobytes() for k, v in emb_ft.vectors.items()}
        run_probe(emb_pre, emb_ft, profiles, k=2, epochs=2)
        assert {k: v.tobytes() for k, v in emb_pre.vectors.items()} == before_pre
        assert {k: v.tobytes() for k, v in emb_ft.vectors.items()} == before_ft

    def test_encoded_feature_gains_over_noise(self):
        # second set linearly encodes sentence_length; first is pure noise
        profiles, rng = self.make_corpus(300)
        ids = [p.sentence_id for p in profiles]
        lengths = np.array([p.sentence_length for p in profiles], dtype=float)
        emb_pre = embedding_set(ids, 8, rng, provenance="noise")
        ft_vectors = {}
        for sid, length in zip(ids, lengths):
            vec = rng.normal(size=8)
            vec[0] = (length - lengths.mean()) / lengths.std()
            ft_vectors[sid] = vec
        emb_ft = EmbeddingSet(dim=8, vectors=ft_vectors, provenance="encoded")
        report = run_probe(emb_pre, emb_ft, profiles, k=5, epochs=5, seed=1)
        assert report.delta_of("sentence_length") > 0.5

    def test_constant_features_excluded_from_results(self):
        profiles, rng = self.make_corpus(30)
        ids = [p.sentence_id for p in profiles]
        emb = embedding_set(ids, 4, rng)
        report = run_probe(emb, emb, profiles, k=2, epochs=1)
        reported = {r.feature for r in report.results}
        assert "avg_word_frequency" in report.excluded_features
        assert reported.isdisjoint(report.excluded_features)

    def test_determinism(self):
        profiles, rng = self.make_corpus(50)
        ids = [p.sentence_id for p in profiles]
        emb_pre = embedding_set(ids, 5, rng)
        emb_ft = embedding_set(ids, 5, rng)
        a = run_probe(emb_pre, emb_ft, profiles, k=3, epochs=3, seed=9)
        b = run_probe(emb_pre, emb_ft, profiles, k=3, epochs=3, seed=9)
        assert a == b

    def test_missing_embedding_rejected(self):
        profiles, rng = self.make_corpus(10)
        ids = [p.sentence_id for p in profiles]
        full = embedding_set(ids, 4, rng)
        partial = EmbeddingSet(
            dim=4,
            vectors={sid: full.vectors[sid] for sid in ids[:-1]},
            provenance="partial",
        )
        with pytest.raises(AlignmentError):
            run_probe(full, partial, profiles, k=2)

    def test_fold_size_contract(self):
        profiles, rng = self.make_corpus(50)
        ids = [p.sentence_id for p in profiles]
        emb = embedding_set(ids, 4, rng)
        report = run_probe(emb, emb, profiles, k=5, epochs=1,
                           train_size=40, test_size=10)
        assert isinstance(report, ProbeReport)
        with pytest.raises(DegenerateInputError):
            run_probe(emb, emb, profiles, k=5, epochs=1, train_size=41)
        with pytest.raises(DegenerateInputError):
            run_probe(emb, emb, profiles, k=5, epochs=1, test_size=9)

    def test_report_csv(self):
        profiles, rng = self.make_corpus(30)
        ids = [p.sentence_id for p in profiles]
        emb = embedding_set(ids, 4, rng)
        report = run_probe(emb, emb, profiles, k=2, epochs=1, language="fi")
        text = probe_report_to_csv(report)
        lines = text.strip().split("\n")
        assert lines[0] == "feature,r2_pre,r2_ft,delta,language"
        assert len(lines) == 1 + 9  # every feature appears, reported or NA
        na_rows = [ln for ln in lines[1:] if ",NA," in ln]
        assert len(na_rows) == len(report.excluded_features)
        assert all(ln.endswith(",fi") for ln in lines[1:])
