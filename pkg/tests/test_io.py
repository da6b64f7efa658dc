"""Deterministic writers and snapshot round trips."""

import numpy as np
import pytest

from dirichlet_nls.basis import DomainSpec, build_basis
from dirichlet_nls.io import config_hash, format_value, load_snapshot, save_snapshot, write_csv
from dirichlet_nls.spectral import random_band_field


@pytest.mark.parametrize("kind,N", [("cube", 6), ("ball", 12)])
def test_snapshot_roundtrip(tmp_path, kind, N):
    b = build_basis(DomainSpec(kind, N))
    f = random_band_field(b, 1 if kind == "cube" else 2, np.random.default_rng(0))
    save_snapshot(str(tmp_path / "s"), f, 0.25)
    g, t = load_snapshot(str(tmp_path / "s"))
    assert t == 0.25 and g.basis.spec == b.spec
    np.testing.assert_array_equal(g.coeffs, f.coeffs)


def test_collocation_snapshot(tmp_path):
    b = build_basis(DomainSpec("cube", 3)).collocation()
    f = b.mode((6, 1, 1))
    save_snapshot(str(tmp_path / "c"), f)
    g, _ = load_snapshot(str(tmp_path / "c"))
    assert g.basis.n_modes == 6
    np.testing.assert_array_equal(g.coeffs, f.coeffs)


def test_floats_round_trip(tmp_path):
    x = 0.1 + 0.2
    assert float(format_value(x)) == x
    assert format_value(np.int64(3)) == "3"
    p = write_csv(str(tmp_path / "a.csv"), ("a", "b"), [{"a": x, "b": "z"}])
    assert open(p).read() == f"a,b\n{x!r},z\n"


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
