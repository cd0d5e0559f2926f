import json

import numpy as np
import pytest

from oldroydb.fields import random_scalar, random_sym_tensor, random_vector
from oldroydb.grid import TorusGrid
from oldroydb.operators import leray_project
from oldroydb.snapshots import SnapshotError, read_field, write_field


@pytest.mark.parametrize("maker,kind", [
    (random_scalar, "scalar"),
    (lambda g, r: leray_project(random_vector(g, r)), "velocity"),
    (random_sym_tensor, "stress"),
])
def test_roundtrip(tmp_path, rng, maker, kind):
    grid = TorusGrid(2, 32)
    field = maker(grid, rng)
    path = tmp_path / f"{kind}.field"
    write_field(path, field)
    back = read_field(path)
    assert back.kind == kind
    assert back.grid == grid
    np.testing.assert_allclose(back.coeffs, field.coeffs, atol=1e-14)


def test_roundtrip_three_dimensional(tmp_path, rng):
    grid = TorusGrid(3, 16)
    tau = random_sym_tensor(grid, rng)
    path = tmp_path / "tau.field"
    write_field(path, tau)
    back = read_field(path)
    assert back.ncomp == 6
    np.testing.assert_allclose(back.coeffs, tau.coeffs, atol=1e-14)


def test_header_is_one_json_line(tmp_path, rng):
    grid = TorusGrid(2, 16)
    field = random_scalar(grid, rng)
    path = tmp_path / "f.field"
    write_field(path, field)
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        payload = fh.read()
    assert header["schema"] == "field-v1"
    assert header["kind"] == "scalar"
    assert header["components"] == 1
    assert len(payload) == grid.n**2 * 8
    # little-endian float64 payload reproduces the physical samples
    arr = np.frombuffer(payload, dtype="<f8").reshape(grid.shape)
    np.testing.assert_allclose(arr, field.to_physical()[0], atol=0)


def test_bad_schema_rejected(tmp_path):
    path = tmp_path / "bad.field"
    path.write_bytes(b'{"schema": "other"}\n')
    with pytest.raises(SnapshotError):
        read_field(path)


def test_truncated_payload_rejected(tmp_path, rng):
    grid = TorusGrid(2, 16)
    field = random_scalar(grid, rng)
    path = tmp_path / "f.field"
    write_field(path, field)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(SnapshotError):
        read_field(path)


def test_component_count_mismatch(tmp_path):
    path = tmp_path / "bad.field"
    header = {"schema": "field-v1", "d": 2, "n": 16, "period": 6.283185307179586,
              "kind": "velocity", "components": 3}
    path.write_bytes(json.dumps(header).encode() + b"\n" + b"\0" * (3 * 256 * 8))
    with pytest.raises(SnapshotError):
        read_field(path)
