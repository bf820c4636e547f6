"""JSONL parsing, validation, serialization, and stratified splitting."""

import json
import os

import numpy as np
import pytest

from demasq import dataio
from demasq.dataio import EmbeddingRecord
from demasq.errors import (
    ConfigurationError,
    ParseError,
    ShapeError,
    ValidationError,
)


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def record_line(rid, label=None, domain="", embedding=(0.1, 0.2)):
    obj = {"id": rid}
    if label is not None:
        obj["label"] = label
    if domain:
        obj["domain"] = domain
    obj["embedding"] = list(embedding)
    return json.dumps(obj)


def make_records(n, d=3):
    rng = np.random.default_rng(42)
    return [EmbeddingRecord(id=f"r{i}", embedding=rng.normal(size=d),
                            label=i % 2, domain="") for i in range(n)]


class TestLoad:
    def test_parses_all_fields(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, [
            record_line("a1", label=0, domain="medical"),
            record_line("a2", label=1),
        ])
        recs = dataio.load_jsonl(path)
        assert [r.id for r in recs] == ["a1", "a2"]
        assert [r.label for r in recs] == [0, 1]
        assert recs[0].domain == "medical"
        assert recs[1].domain == ""
        np.testing.assert_array_equal(recs[0].embedding, [0.1, 0.2])

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text(
            "\n" + record_line("a1", label=0) + "\n\n   \n"
            + record_line("a2", label=1) + "\n\n", encoding="utf-8")
        assert len(dataio.load_jsonl(path)) == 2

    def test_checked_in_fixture_loads(self):
        path = os.path.join(os.path.dirname(__file__), "data",
                            "embeddings_8x16.jsonl")
        recs = dataio.load_jsonl(path)
        assert len(recs) == 8
        assert all(r.embedding.shape == (16,) for r in recs)
        assert sorted({r.label for r in recs}) == [0, 1]
        assert {r.domain for r in recs} == {"finance", "medical", "reddit", ""}

    def test_embeddings_read_only(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, [record_line("a1", label=0)])
        rec = dataio.load_jsonl(path)[0]
        with pytest.raises(ValueError):
            rec.embedding[0] = 5.0

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, [record_line("a1", label=0), "{not json"])
        with pytest.raises(ParseError, match="line 2"):
            dataio.load_jsonl(path)

    def test_line_numbers_count_blanks(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text("\n\n{bad\n", encoding="utf-8")
        with pytest.raises(ParseError, match="line 3"):
            dataio.load_jsonl(path)

    def test_missing_label_rejected_by_default(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, [record_line("a1")])
        with pytest.raises(ValidationError, match="label"):
            dataio.load_jsonl(path)

    def test_missing_label_allowed_when_optional(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, [record_line("a1")])
        recs = dataio.load_jsonl(path, require_labels=False)
        assert recs[0].label is None

    @pytest.mark.parametrize("line,needle", [
        ('{"id":"","label":0,"embedding":[1.0]}', "id"),
        ('{"id":7,"label":0,"embedding":[1.0]}', "id"),
        ('{"label":0,"embedding":[1.0]}', "id"),
        ('{"id":"a","label":2,"embedding":[1.0]}', "label"),
        ('{"id":"a","label":true,"embedding":[1.0]}', "label"),
        ('{"id":"a","label":0,"domain":3,"embedding":[1.0]}', "domain"),
        ('{"id":"a","label":0}', "embedding"),
        ('{"id":"a","label":0,"embedding":[]}', "embedding"),
        ('{"id":"a","label":0,"embedding":"x"}', "embedding"),
        ('{"id":"a","label":0,"embedding":[1.0,"x"]}', "embedding"),
        ('{"id":"a","label":0,"embedding":[[1.0]]}', "embedding"),
        ('{"id":"a","label":0,"embedding":[1.0,null]}', "embedding"),
        ('[1,2]', "object"),
    ])
    def test_malformed_records_rejected(self, tmp_path, line, needle):
        path = tmp_path / "data.jsonl"
        write_lines(path, [line])
        with pytest.raises(ValidationError, match=needle):
            dataio.load_jsonl(path)

    def test_non_finite_embedding_rejected(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, ['{"id":"a","label":0,"embedding":[1.0,1e999]}'])
        with pytest.raises(ValidationError, match="finite"):
            dataio.load_jsonl(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, [record_line("a1", label=0),
                           record_line("a1", label=1)])
        with pytest.raises(ValidationError, match="duplicate"):
            dataio.load_jsonl(path)

    def test_mixed_dimensions_rejected(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_lines(path, [
            record_line("a1", label=0, embedding=[1.0, 2.0]),
            record_line("a2", label=1, embedding=[1.0, 2.0, 3.0]),
        ])
        with pytest.raises(ShapeError, match="line 2"):
            dataio.load_jsonl(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            dataio.load_jsonl(tmp_path / "absent.jsonl")


class TestDump:
    def test_round_trip(self, tmp_path):
        recs = [
            EmbeddingRecord(id="a1", embedding=np.array([0.5, -1.25]),
                            label=0, domain="finance"),
            EmbeddingRecord(id="a2", embedding=np.array([1.0, 2.0]),
                            label=1),
        ]
        path = tmp_path / "out.jsonl"
        assert dataio.dump_jsonl(recs, path) == 2
        back = dataio.load_jsonl(path)
        for orig, roundtrip in zip(recs, back):
            assert roundtrip.id == orig.id
            assert roundtrip.label == orig.label
            assert roundtrip.domain == orig.domain
            np.testing.assert_array_equal(roundtrip.embedding, orig.embedding)

    def test_unlabeled_round_trip(self, tmp_path):
        recs = [EmbeddingRecord(id="u1", embedding=np.array([3.0]))]
        path = tmp_path / "out.jsonl"
        dataio.dump_jsonl(recs, path)
        back = dataio.load_jsonl(path, require_labels=False)
        assert back[0].label is None

    def test_one_object_per_line(self, tmp_path):
        path = tmp_path / "out.jsonl"
        dataio.dump_jsonl(make_records(3), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        assert all(json.loads(line)["id"].startswith("r") for line in lines)


class TestToArrays:
    def test_stacks_fields(self):
        recs = make_records(4, d=2)
        X, y, ids, domains = dataio.to_arrays(recs)
        assert X.shape == (4, 2)
        np.testing.assert_array_equal(y, [0, 1, 0, 1])
        assert ids == ["r0", "r1", "r2", "r3"]
        assert domains == ["", "", "", ""]

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            dataio.to_arrays([])

    def test_unlabeled_rejected(self):
        recs = [EmbeddingRecord(id="u", embedding=np.ones(2))]
        with pytest.raises(ValidationError):
            dataio.to_arrays(recs)


class TestStratifiedSplit:
    def test_exact_counts_per_label(self):
        recs = make_records(100)
        split = dataio.stratified_split(recs, 0.8, seed=0)
        assert len(split.train) == 80
        assert len(split.test) == 20
        train_labels = [r.label for r in split.train]
        assert train_labels.count(0) == 40
        assert train_labels.count(1) == 40
        test_labels = [r.label for r in split.test]
        assert test_labels.count(0) == 10
        assert test_labels.count(1) == 10

    def test_sides_are_disjoint_and_complete(self):
        recs = make_records(30)
        split = dataio.stratified_split(recs, 0.7, seed=3)
        train_ids = {r.id for r in split.train}
        test_ids = {r.id for r in split.test}
        assert not train_ids & test_ids
        assert train_ids | test_ids == {r.id for r in recs}

    def test_deterministic(self):
        recs = make_records(40)
        a = dataio.stratified_split(recs, 0.8, seed=5)
        b = dataio.stratified_split(recs, 0.8, seed=5)
        assert [r.id for r in a.train] == [r.id for r in b.train]
        assert [r.id for r in a.test] == [r.id for r in b.test]

    def test_seed_changes_membership(self):
        recs = make_records(40)
        a = dataio.stratified_split(recs, 0.8, seed=5)
        b = dataio.stratified_split(recs, 0.8, seed=6)
        assert {r.id for r in a.train} != {r.id for r in b.train}

    def test_input_order_preserved_within_sides(self):
        recs = make_records(20)
        split = dataio.stratified_split(recs, 0.75, seed=1)
        pos = {r.id: i for i, r in enumerate(recs)}
        for side in (split.train, split.test):
            positions = [pos[r.id] for r in side]
            assert positions == sorted(positions)

    def test_small_labels_keep_one_on_each_side(self):
        recs = make_records(4)  # two per label
        split = dataio.stratified_split(recs, 0.9, seed=0)
        for side in (split.train, split.test):
            labels = {r.label for r in side}
            assert labels == {0, 1}

    def test_ratio_bounds(self):
        recs = make_records(10)
        for bad in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(ConfigurationError):
                dataio.stratified_split(recs, bad, seed=0)

    def test_single_class_rejected(self):
        recs = [EmbeddingRecord(id=f"r{i}", embedding=np.ones(2) * i, label=0)
                for i in range(4)]
        with pytest.raises(ConfigurationError):
            dataio.stratified_split(recs, 0.5, seed=0)

    def test_unlabeled_rejected(self):
        recs = make_records(4) + [
            EmbeddingRecord(id="u", embedding=np.ones(3))]
        with pytest.raises(ValidationError):
            dataio.stratified_split(recs, 0.5, seed=0)
