import os

import numpy as np
import pytest

from config.errors import ArchiveError, MissingArchiveError, ProvenanceError
from klepca.solver import solve_kle
from pme import embed
from storage.archive_manager import BASIS, EMBEDDING, SNAPSHOTS, ArchiveManager, config_hash

from conftest import linear_toy


@pytest.fixture
def archive(tmp_path):
    with ArchiveManager(str(tmp_path / "run")) as manager:
        yield manager


@pytest.fixture
def stored(archive):
    shape, _, snapshots = linear_toy(L=4, M=3, S=25, seed=2)
    basis = solve_kle(snapshots, shape, 0.9)
    emb = embed(snapshots, basis, shape, margin=0.05)
    archive.write_snapshots(snapshots, "cfg", "toy")
    archive.write_basis(basis, "cfg")
    archive.write_embedding(emb, "cfg")
    return snapshots, basis, emb


class TestArchiveRoundTrip:
    def test_snapshots(self, archive, stored):
        snapshots, _, _ = stored
        loaded = archive.read_snapshots()
        assert loaded.provenance == snapshots.provenance
        np.testing.assert_array_equal(loaded.D, snapshots.D)
        np.testing.assert_array_equal(loaded.U, snapshots.U)
        np.testing.assert_array_equal(loaded.lower, snapshots.lower)
        assert loaded.seed == 2

    def test_basis(self, archive, stored):
        snapshots, basis, _ = stored
        loaded = archive.read_basis(archive.read_snapshots())
        assert loaded.digest() == basis.digest()
        assert loaded.N == basis.N
        np.testing.assert_array_equal(loaded.Z, basis.Z)

    def test_embedding(self, archive, stored):
        _, basis, emb = stored
        loaded = archive.read_embedding(archive.read_basis())
        assert loaded.digest() == emb.digest()
        assert loaded.margin == 0.05
        np.testing.assert_array_equal(loaded.x_lower, emb.x_lower)

    def test_meta_is_sorted(self, archive, stored):
        meta = archive.read_meta(BASIS)
        assert meta["config_hash"] == "cfg"
        with open(archive.path(BASIS, "meta.json")) as f:
            text = f.read()
        keys = [line.split('"')[1] for line in text.splitlines() if line.startswith('  "')]
        assert keys == sorted(keys)

    def test_snapshot_files(self, archive, stored):
        snapshots, _, _ = stored
        assert sorted(os.listdir(archive.stage_dir(SNAPSHOTS))) == [
            "D.csv", "U.csv", "bounds.csv", "means.csv", "meta.json"]
        means = archive.read_matrix(SNAPSHOTS, "means.csv", ndmin=1)
        assert means.size == snapshots.D.shape[0] + snapshots.M
        np.testing.assert_array_equal(means[-snapshots.M:], snapshots.mean_u)

    def test_rewrite_is_byte_identical(self, archive, stored):
        snapshots, _, _ = stored
        before = archive.stage_digest(SNAPSHOTS)
        archive.write_snapshots(snapshots, "cfg", "toy")
        assert archive.stage_digest(SNAPSHOTS) == before


class TestProvenance:
    def test_tampered_snapshots(self, archive, stored):
        snapshots, _, _ = stored
        D = np.array(snapshots.D)
        D[0, 0] += 1e-3
        archive.write_matrix(SNAPSHOTS, "D.csv", D)
        with pytest.raises(ProvenanceError):
            archive.read_snapshots()

    def test_basis_from_other_snapshots(self, archive, stored):
        _, _, other = linear_toy(L=4, M=3, S=25, seed=3)
        with pytest.raises(ProvenanceError):
            archive.read_basis(other)

    def test_embedding_on_other_basis(self, archive, stored):
        _, basis, _ = stored
        with pytest.raises(ProvenanceError):
            archive.read_embedding(basis.truncated(1) if basis.N > 1 else basis.truncated(basis.rank))


    def test_stage_from_another_config(self, archive, stored):
        snapshots, basis, _ = stored
        assert archive.read_snapshots("cfg").provenance == snapshots.provenance
        with pytest.raises(ProvenanceError):
            archive.read_snapshots("other")
        with pytest.raises(ProvenanceError):
            archive.read_basis(snapshots, "other")
        with pytest.raises(ProvenanceError):
            archive.read_embedding(basis, "other")

    def test_truncated_means(self, archive, stored):
        snapshots, _, _ = stored
        archive.write_matrix(SNAPSHOTS, "means.csv", snapshots.mean_delta)
        with pytest.raises(ArchiveError):
            archive.read_snapshots()


class TestMissingStages:
    def test_require_names_stage(self, archive):
        with pytest.raises(MissingArchiveError) as info:
            archive.require(BASIS)
        assert info.value.stage == BASIS
        assert "'reduce'" in str(info.value)

    def test_read_before_write(self, archive):
        assert not archive.has_stage(EMBEDDING)
        with pytest.raises(MissingArchiveError):
            archive.read_snapshots()


class TestTables:
    def test_write_then_read(self, archive):
        rows = [{"n": 1, "nmse": 0.25, "label": "a"}, {"n": 2, "nmse": 0.1, "label": "b"}]
        archive.write_table("report", "table.csv", rows)
        loaded = archive.read_table("report", "table.csv")
        assert [r["n"] for r in loaded] == ["1", "2"]
        assert float(loaded[1]["nmse"]) == 0.1

    def test_rows_with_different_columns(self, archive):
        rows = [{"space": "pme", "evals_to_0.25": 12}, {"space": "pme", "evals_to_0.05": 3}]
        archive.write_table("report", "table.csv", rows)
        loaded = archive.read_table("report", "table.csv")
        assert list(loaded[0]) == ["space", "evals_to_0.25", "evals_to_0.05"]
        assert loaded[0]["evals_to_0.05"] == "" and loaded[1]["evals_to_0.05"] == "3"

    def test_config_hash_ignores_key_order(self):
        assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})
