"""Dirichlet eigenbases for the cube [0, pi]^3 and the unit ball (radial modes).

Cube modes are products of sines, e = (2/pi)^{3/2} sin(ax) sin(by) sin(cz), with
eigenvalue a^2 + b^2 + c^2.  Ball modes are the radial eigenfunctions
e_n(r) = sin(n pi r) / (r sqrt(2 pi)), eigenvalue (n pi)^2.

Cube samples live on the closed grid x_g = pi g / (G + 1), g = 0..G+1, with
trapezoidal weights; the sine modes vanish on the two end points so the
interior part is the usual DST-I grid.  With G >= 2N every integrand that is a
product of four band-limited factors (|f|^4, |v grad u|^2, ...) is integrated
exactly.  Transforms are separable dense products, which for band-limited
coefficient tensors (N <= G/2) is faster than the padded FFT route.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "DomainKind",
    "DomainSpec",
    "EigenBasis",
    "SpectralField",
    "PhysicalField",
    "BoundaryField",
    "build_basis",
    "synthesize",
    "analyze",
    "gradient",
    "laplacian_power",
    "normal_trace",
    "boundary_energy",
    "face_energies",
    "CUBE_FACES",
]

CUBE_SIDE = np.pi
BALL_RADIUS = 1.0
MODE_ORDERING_VERSION = "eig-lex-1"

# (axis, side) with side 0 at x_axis = 0 and side 1 at x_axis = pi
CUBE_FACES = ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1))


class DomainKind(str, enum.Enum):
    CUBE = "cube"
    BALL = "ball"


@dataclass(frozen=True)
class DomainSpec:
    """Domain kind, per-axis mode limit ``N`` and grid oversampling ``q``.

    The grid has ``G = q * N`` interior samples per axis (cube) and
    ``2 q N + 64`` Gauss-Legendre nodes on (0, 1) (ball).
    """

    kind: DomainKind
    N: int
    q: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if int(self.q) != self.q or self.q < 2:
            raise ValueError(f"q must be an integer >= 2 for dealiasing, got {self.q}")

    @property
    def grid_size(self) -> int:
        if self.kind is DomainKind.CUBE:
            return self.q * self.N
        return 2 * self.q * self.N + 64

    @property
    def volume(self) -> float:
        if self.kind is DomainKind.CUBE:
            return CUBE_SIDE**3
        return 4.0 * np.pi / 3.0

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "N": self.N, "q": self.q}


class EigenBasis:
    """Ordered Dirichlet eigenmodes of a domain, with the sampling grid.

    Modes are ordered by eigenvalue, ties broken lexicographically by index.
    ``n_modes`` is the per-axis mode limit; it equals ``spec.N`` except for the
    collocation basis (see :meth:`collocation`), which keeps all ``G`` grid
    modes so that sampling is a bijection.
    """

    def __init__(self, spec: DomainSpec, n_modes: int | None = None):
        self.spec = spec
        self.n_modes = spec.N if n_modes is None else int(n_modes)
        if self.n_modes < 1:
            raise ValueError("n_modes must be positive")
        self._cache: dict = {}
        if spec.kind is DomainKind.CUBE:
            self._init_cube()
        else:
            self._init_ball()
        self.eigenvalues.setflags(write=False)
        self.indices.setflags(write=False)

    # -- construction -------------------------------------------------------
    def _init_cube(self):
        n = self.n_modes
        G = self.spec.grid_size
        if n > G:
            raise ValueError("n_modes cannot exceed the grid size")
        a = np.arange(1, n + 1)
        A, B, C = np.meshgrid(a, a, a, indexing="ij")
        lam = (A**2 + B**2 + C**2).ravel()
        order = np.lexsort((C.ravel(), B.ravel(), A.ravel(), lam))
        self._order = order
        self.indices = np.stack([A.ravel(), B.ravel(), C.ravel()], axis=1)[order]
        self.eigenvalues = lam[order].astype(float)
        self.normalization = np.full(lam.size, (2.0 / np.pi) ** 1.5)
        self.lam_tensor = lam.reshape(n, n, n).astype(float)

        h = np.pi / (G + 1)
        x = h * np.arange(G + 2)
        w = np.full(G + 2, h)
        w[0] = w[-1] = h / 2
        self.points = (x,)
        self.weights = (w,)
        s = np.sqrt(2.0 / np.pi)
        self.sin_matrix = s * np.sin(np.outer(x, a))
        self.sin_matrix[0] = 0.0
        self.sin_matrix[-1] = 0.0
        self.dcos_matrix = s * a * np.cos(np.outer(x, a))
        self.analysis_matrix = (self.sin_matrix * w[:, None]).T.copy()

    def _init_ball(self):
        n = self.n_modes
        nr = self.spec.grid_size
        t, wt = leggauss(nr)
        r = np.concatenate([(t + 1.0) / 2.0, [BALL_RADIUS]])
        w = np.concatenate([wt / 2.0 * 4.0 * np.pi * ((t + 1.0) / 2.0) ** 2, [0.0]])
        k = np.pi * np.arange(1, n + 1)
        self.indices = np.arange(1, n + 1)[:, None]
        self.eigenvalues = k**2
        self.normalization = np.full(n, 1.0 / np.sqrt(2.0 * np.pi))
        self.points = (r,)
        self.weights = (w,)
        kr = np.outer(r, k)
        self.sin_matrix = np.sin(kr) / (r[:, None] * np.sqrt(2.0 * np.pi))
        self.sin_matrix[-1] = 0.0
        self.dcos_matrix = (kr * np.cos(kr) - np.sin(kr)) / (r[:, None] ** 2 * np.sqrt(2.0 * np.pi))
        self.analysis_matrix = (self.sin_matrix * w[:, None]).T.copy()

    # -- properties -----------------------------------------------------------
    @property
    def kind(self) -> DomainKind:
        return self.spec.kind

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def frequencies(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)

    @property
    def is_collocation(self) -> bool:
        return self.kind is DomainKind.CUBE and self.n_modes == self.spec.grid_size

    def collocation(self) -> "EigenBasis":
        """Basis with every grid mode retained (cube only)."""
        if self.kind is not DomainKind.CUBE:
            raise ValueError("collocation basis exists only for the cube")
        if self.is_collocation:
            return self
        if "collocation" not in self._cache:
            self._cache["collocation"] = EigenBasis(self.spec, self.spec.grid_size)
        return self._cache["collocation"]

    def __repr__(self):
        return f"EigenBasis({self.spec.kind.value}, N={self.spec.N}, q={self.spec.q}, modes={self.size})"

    # -- coefficient layout ---------------------------------------------------
    def to_tensor(self, coeffs: np.ndarray) -> np.ndarray:
        """Scatter an ordered coefficient vector into the (n, n, n) index tensor."""
        n = self.n_modes
        t = np.empty(n**3, dtype=np.result_type(coeffs.dtype, np.complex128))
        t[self._order] = coeffs
        return t.reshape(n, n, n)

    def from_tensor(self, tensor: np.ndarray) -> np.ndarray:
        return tensor.reshape(-1)[self._order]

    def zeros(self) -> "SpectralField":
        return SpectralField(self, np.zeros(self.size, dtype=complex))

    def mode(self, index: Sequence[int] | int, amplitude: complex = 1.0) -> "SpectralField":
        """Single eigenmode with the given per-axis index tuple (or radial n)."""
        idx = np.atleast_1d(np.asarray(index))
        hits = np.flatnonzero((self.indices == idx[None, :]).all(axis=1))
        if hits.size != 1:
            raise KeyError(f"mode {tuple(idx)} not in basis")
        c = np.zeros(self.size, dtype=complex)
        c[hits[0]] = amplitude
        return SpectralField(self, c)

    def mode_position(self, index) -> int:
        idx = np.atleast_1d(np.asarray(index))
        return int(np.flatnonzero((self.indices == idx[None, :]).all(axis=1))[0])


@dataclass
class SpectralField:
    """Complex coefficient vector over an :class:`EigenBasis`."""

    basis: EigenBasis
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} coefficients, got {self.coeffs.shape}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def mass(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def copy(self) -> "SpectralField":
        return SpectralField(self.basis, self.coeffs.copy())

    def with_coeffs(self, coeffs) -> "SpectralField":
        return SpectralField(self.basis, coeffs)

    def tensor(self) -> np.ndarray:
        return self.basis.to_tensor(self.coeffs)

    def _check(self, other):
        if other.basis is not self.basis:
            raise ValueError("fields live on different bases")

    def __add__(self, other):
        self._check(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def conj(self) -> "SpectralField":
        # eigenfunctions are real
        return self.with_coeffs(self.coeffs.conj())


@dataclass
class PhysicalField:
    """Complex samples on a tensor grid (or the radial line) with weights.

    ``points``/``weights`` hold one 1D array per axis; the cube uses the same
    array for all three axes.  For the ball the weights include ``4 pi r^2``.
    """

    points: tuple
    weights: tuple
    values: np.ndarray

    @property
    def weight_array(self) -> np.ndarray:
        if len(self.weights) == 1 and self.values.ndim == 3:
            w = self.weights[0]
            return w[:, None, None] * w[None, :, None] * w[None, None, :]
        if len(self.weights) == 1:
            return self.weights[0]
        w0, w1, w2 = self.weights
        return w0[:, None, None] * w1[None, :, None] * w2[None, None, :]

    def integrate(self, values: np.ndarray | None = None) -> complex:
        v = self.values if values is None else values
        return complex(np.sum(self.weight_array * v))

    def norm_sq(self) -> float:
        return float(np.real(self.integrate(np.abs(self.values) ** 2)))

    def lp_norm(self, p: float) -> float:
        return float(np.real(self.integrate(np.abs(self.values) ** p))) ** (1.0 / p)


@dataclass
class BoundaryField:
    """Outward normal derivative sampled on the boundary.

    Cube: ``faces`` maps each ``(axis, side)`` in :data:`CUBE_FACES` to a 2D
    array on the closed face grid, integrated with ``face_weights``.
    Ball: a single value ``d_r f(1)`` with total surface measure ``4 pi``.
    """

    kind: DomainKind
    faces: dict = field(default_factory=dict)
    face_weights: np.ndarray | None = None
    value: complex | None = None

    def integral_sq(self) -> float:
        """Surface integral of |d_n f|^2."""
        if self.kind is DomainKind.BALL:
            return float(4.0 * np.pi * abs(self.value) ** 2)
        return float(sum(np.sum(self.face_weights * np.abs(v) ** 2) for v in self.faces.values()))


def build_basis(spec: DomainSpec) -> EigenBasis:
    """Complete orthonormal Dirichlet basis up to per-axis index ``spec.N``."""
    if not isinstance(spec, DomainSpec):
        spec = DomainSpec(**spec)
    return EigenBasis(spec)


# -- separable transforms ---------------------------------------------------

def _trim(tensor: np.ndarray) -> tuple[int, int, int]:
    """Per-axis extent of the nonzero block of a coefficient tensor."""
    nz = tensor != 0
    ext = []
    for ax in range(3):
        other = tuple(i for i in range(3) if i != ax)
        hit = np.flatnonzero(nz.any(axis=other))
        ext.append(int(hit[-1]) + 1 if hit.size else 0)
    return tuple(ext)


def separable_split(tensor: np.ndarray, mats) -> np.ndarray:
    """Apply ``mats[i]`` along axis ``i`` of a complex tensor.

    Returns the stacked (real, imag) parts with shape ``(2, g0, g1, g2)``; all
    products run as real GEMMs on contiguous arrays.
    """
    n = _trim(tensor)
    g = tuple(m.shape[0] for m in mats)
    if 0 in n:
        return np.zeros((2,) + g)
    t = tensor[: n[0], : n[1], : n[2]]
    A0, A1, A2 = (m[:, :k] for m, k in zip(mats, n))
    X = np.stack([t.real, t.imag])
    X = (X.reshape(-1, n[2]) @ A2.T).reshape(2, n[0], n[1], g[2])
    X = np.matmul(A1, X)
    X = (A0 @ X.reshape(2, n[0], g[1] * g[2])).reshape(2, g[0], g[1], g[2])
    return X


def _separable(tensor, mats) -> np.ndarray:
    X = separable_split(tensor, mats)
    return X[0] + 1j * X[1]


def _analysis_tensor(values: np.ndarray, A: np.ndarray) -> np.ndarray:
    X = np.stack([values.real, values.imag])
    G = values.shape
    n = A.shape[0]
    X = (X.reshape(-1, G[2]) @ A.T).reshape(2, G[0], G[1], n)
    X = np.matmul(A, X)
    X = (A @ X.reshape(2, G[0], n * n)).reshape(2, n, n, n)
    return X[0] + 1j * X[1]


def synthesize(f: SpectralField) -> PhysicalField:
    """Samples of sum_n c_n e_n on the basis grid."""
    b = f.basis
    if b.kind is DomainKind.CUBE:
        S = b.sin_matrix
        vals = _separable(f.tensor(), (S, S, S))
    else:
        vals = b.sin_matrix @ f.coeffs
    return PhysicalField(b.points, b.weights, vals)


def analyze(g: PhysicalField, basis: EigenBasis) -> SpectralField:
    """Quadrature projections <g, e_n>; inverse of :func:`synthesize` on band-limited data."""
    A = basis.analysis_matrix
    if basis.kind is DomainKind.CUBE:
        c = basis.from_tensor(_analysis_tensor(np.asarray(g.values, dtype=complex), A))
    else:
        c = A @ np.asarray(g.values, dtype=complex)
    return SpectralField(basis, c)


def gradient(f: SpectralField) -> list[PhysicalField]:
    """Components of grad f on the grid (one radial component for the ball)."""
    b = f.basis
    if b.kind is DomainKind.BALL:
        return [PhysicalField(b.points, b.weights, b.dcos_matrix @ f.coeffs)]
    S, D = b.sin_matrix, b.dcos_matrix
    t = f.tensor()
    out = []
    for ax in range(3):
        mats = tuple(D if i == ax else S for i in range(3))
        out.append(PhysicalField(b.points, b.weights, _separable(t, mats)))
    return out


def laplacian_power(f: SpectralField, l: int) -> SpectralField:
    """Apply Delta^l, i.e. multiply coefficients by (-lambda_n)^l."""
    if l < 0 or int(l) != l:
        raise ValueError("l must be a nonnegative integer")
    return f.with_coeffs(f.coeffs * (-f.basis.eigenvalues) ** int(l))


def _face_coefficients(f: SpectralField) -> dict:
    """2D sine coefficients of d_n f on each cube face (outward normal)."""
    b = f.basis
    t = f.tensor()
    a = np.arange(1, b.n_modes + 1)
    s = np.sqrt(2.0 / np.pi)
    out = {}
    for ax, side in CUBE_FACES:
        w = s * a * (1.0 if side == 0 else (-1.0) ** a)
        d = np.tensordot(w, t, axes=([0], [ax]))
        out[(ax, side)] = -d if side == 0 else d
    return out


def face_energies(f: SpectralField) -> np.ndarray:
    """Per-face integrals of |d_n f|^2 by Parseval (cube), in CUBE_FACES order.

    For the ball returns a length-1 array with the whole-sphere integral.
    """
    b = f.basis
    if b.kind is DomainKind.BALL:
        k = np.pi * np.arange(1, b.n_modes + 1)
        dr = np.sum(f.coeffs * k * (-1.0) ** np.arange(1, b.n_modes + 1)) / np.sqrt(2 * np.pi)
        return np.array([4.0 * np.pi * abs(dr) ** 2])
    d = _face_coefficients(f)
    return np.array([np.sum(np.abs(d[key]) ** 2) for key in CUBE_FACES])


def boundary_energy(f: SpectralField) -> float:
    """Surface integral of |d_n f|^2."""
    return float(face_energies(f).sum())


def normal_trace(f: SpectralField) -> BoundaryField:
    """Outward normal derivative on the boundary, sampled on the face grids."""
    b = f.basis
    if b.kind is DomainKind.BALL:
        k = np.pi * np.arange(1, b.n_modes + 1)
        dr = np.sum(f.coeffs * k * (-1.0) ** np.arange(1, b.n_modes + 1)) / np.sqrt(2 * np.pi)
        return BoundaryField(DomainKind.BALL, value=complex(dr))
    S = b.sin_matrix
    w = b.weights[0]
    faces = {key: S @ d @ S.T for key, d in _face_coefficients(f).items()}
    return BoundaryField(DomainKind.CUBE, faces=faces, face_weights=np.outer(w, w))
