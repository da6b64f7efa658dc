"""Result persistence: deterministic CSV/JSON writers and field snapshots.

A snapshot is a JSON descriptor (domain, mode count, ordering tag, time) next
to a raw little-endian complex128 ``.bin`` of the coefficients in basis order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

from .basis import DomainKind, DomainSpec, EigenBasis, SpectralField, build_basis

__all__ = [
    "MODE_ORDERING_VERSION",
    "format_value",
    "write_csv",
    "write_json",
    "config_hash",
    "save_snapshot",
    "load_snapshot",
]

MODE_ORDERING_VERSION = "eig-lex-1"


def format_value(v):
    """Floats by repr (round-trip exact), everything else by str."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def write_csv(path: str, columns, rows) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        for r in rows:
            wr.writerow([format_value(r[c]) for c in columns])
    return path


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path: str, payload: dict) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")
    return path


def config_hash(payload: dict) -> str:
    """sha256 of the canonical (sorted, compact) JSON encoding."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_default)
    return hashlib.sha256(text.encode()).hexdigest()


def save_snapshot(stem: str, f: SpectralField, t: float = 0.0) -> tuple[str, str]:
    """Write ``stem.json`` and ``stem.bin``; returns both paths."""
    b = f.basis
    desc = {
        "domain": b.spec.to_dict(),
        "n_modes": b.n_modes,
        "size": b.size,
        "ordering": MODE_ORDERING_VERSION,
        "dtype": "<c16",
        "t": float(t),
    }
    p_bin = stem + ".bin"
    os.makedirs(os.path.dirname(os.path.abspath(p_bin)), exist_ok=True)
    np.asarray(f.coeffs, dtype="<c16").tofile(p_bin)
    desc["file"] = os.path.basename(p_bin)
    return write_json(stem + ".json", desc), p_bin


def load_snapshot(stem: str) -> tuple[SpectralField, float]:
    """Inverse of :func:`save_snapshot`."""
    with open(stem + ".json") as fh:
        desc = json.load(fh)
    if desc.get("ordering") != MODE_ORDERING_VERSION:
        raise ValueError(f"unsupported mode ordering {desc.get('ordering')!r}")
    d = desc["domain"]
    spec = DomainSpec(DomainKind(d["kind"]), int(d["N"]), int(d["q"]))
    basis = build_basis(spec)
    if desc["n_modes"] != spec.N:
        basis = EigenBasis(spec, n_modes=desc["n_modes"])
    c = np.fromfile(os.path.join(os.path.dirname(os.path.abspath(stem + ".json")), desc["file"]), dtype="<c16")
    if c.size != basis.size:
        raise ValueError("coefficient count does not match the descriptor")
    return SpectralField(basis, c), float(desc["t"])
