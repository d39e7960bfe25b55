"""Tridiagonal difference operators on truncated lattice windows and their
spectral projections onto the positive half-line.

Sites are indexed by doubled coordinates throughout: a window on the
half-integer lattice holds odd integers ``2x``, a window on the integer
lattice holds even ones.  Truncation is Dirichlet: couplings leaving the
window are dropped.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .measures import Complementary, Degenerate1, ParamSet, Principal

MAX_EIGEN_SIZE = 8192
QL_MAX_ITER = 50


class SpectralGapError(ArithmeticError):
    """An eigenvalue fell inside the zero gap: the window is too small or the
    parameters are close to a degeneracy."""


class EigenConvergenceError(ArithmeticError):
    """The tridiagonal eigensolver did not converge within its iteration cap."""


@dataclass(frozen=True)
class Window:
    """``2M`` consecutive lattice sites.

    On the half-integer lattice the sites are ``offset + (-M + 1/2), ...,
    offset + (M - 1/2)``; on the integer lattice ``offset - M, ...,
    offset + M - 1``.  ``offset`` is always an integer.
    """

    half_width: int
    offset: int = 0
    lattice: str = "half"

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError("half_width must be at least 1")
        if self.lattice not in ("half", "int"):
            raise ValueError("lattice must be 'half' or 'int'")

    @property
    def size(self) -> int:
        return 2 * self.half_width

    @property
    def twice(self) -> np.ndarray:
        """Doubled coordinates of the sites, ascending."""
        M = self.half_width
        if self.lattice == "half":
            return 2 * self.offset + np.arange(-2 * M + 1, 2 * M, 2, dtype=np.int64)
        return 2 * self.offset + np.arange(-2 * M, 2 * M, 2, dtype=np.int64)

    @property
    def x(self) -> np.ndarray:
        return self.twice / 2.0

    def index_of(self, twice_x) -> np.ndarray:
        twice_x = np.asarray(twice_x, dtype=np.int64)
        idx = (twice_x - self.twice[0]) // 2
        if np.any(idx < 0) or np.any(idx >= self.size) or np.any((twice_x - self.twice[0]) % 2):
            raise KeyError(f"sites {twice_x} not in window")
        return idx

    def contains(self, other: "Window") -> bool:
        return self.lattice == other.lattice and other.twice[0] >= self.twice[0] and other.twice[-1] <= self.twice[-1]

    def to_json(self) -> dict:
        return {"half_width": self.half_width, "offset": self.offset, "lattice": self.lattice}


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix of a difference operator on a window.

    ``offdiag[i]`` couples site ``i`` to site ``i + 1``.
    """

    window: Window
    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)
    kind: str = "generic"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.window.size
        if self.diag.shape != (n,) or self.offdiag.shape != (n - 1,):
            raise ValueError("coefficient arrays do not match the window")
        if not (np.all(np.isfinite(self.diag)) and np.all(np.isfinite(self.offdiag))):
            raise ValueError("coefficients must be finite reals")

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Matrix-vector product; ``f`` may carry extra trailing columns."""
        f = np.asarray(f, dtype=float)
        out = self.diag.reshape((-1,) + (1,) * (f.ndim - 1)) * f
        e = self.offdiag.reshape((-1,) + (1,) * (f.ndim - 1))
        out[:-1] += e * f[1:]
        out[1:] += e * f[:-1]
        return out

    def norm(self) -> float:
        """Cheap upper bound on the spectral norm (max absolute row sum)."""
        e = np.abs(self.offdiag)
        rows = np.abs(self.diag).copy()
        rows[:-1] += e
        rows[1:] += e
        return float(rows.max())


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    window: Window
    kind: str = "generic"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class KernelMatrix:
    """Kernel values ``K[x][y]`` on a set of sites (doubled coordinates)."""

    sites: np.ndarray
    values: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict)

    def index(self, twice_x: int) -> int:
        hits = np.flatnonzero(self.sites == int(twice_x))
        if not len(hits):
            raise KeyError(f"site {twice_x}/2 not in kernel window")
        return int(hits[0])

    def value(self, twice_x: int, twice_y: int) -> float:
        return float(self.values[self.index(twice_x), self.index(twice_y)])

    def restrict(self, twice_sites) -> "KernelMatrix":
        idx = [self.index(s) for s in twice_sites]
        return KernelMatrix(np.asarray(twice_sites, dtype=np.int64), self.values[np.ix_(idx, idx)].copy(), dict(self.provenance))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x2", "y2", "value"])
        for i, x2 in enumerate(self.sites):
            for j, y2 in enumerate(self.sites):
                w.writerow([int(x2), int(y2), format(float(self.values[i, j]), ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, provenance: dict | None = None) -> "KernelMatrix":
        rows = list(csv.DictReader(io.StringIO(text)))
        sites = sorted({int(r["x2"]) for r in rows})
        pos = {s: i for i, s in enumerate(sites)}
        values = np.full((len(sites), len(sites)), np.nan)
        for r in rows:
            values[pos[int(r["x2"])], pos[int(r["y2"])]] = float(r["value"])
        return cls(np.array(sites, dtype=np.int64), values, provenance or {})

    def to_json(self) -> str:
        return json.dumps(
            {
                "sites_x2": [int(s) for s in self.sites],
                "values": [[float(v) for v in row] for row in self.values],
                "provenance": self.provenance,
            },
            indent=2,
            sort_keys=True,
        )


def _require_half(w: Window):
    if w.lattice != "half":
        raise ValueError("this operator lives on the half-integer lattice")


def build_hypergeometric(ps: ParamSet, w: Window) -> TridiagonalOperator:
    """Hypergeometric operator: ``d[x] = -(x + xi(z + z' + x))``,
    ``e[x] = sqrt(xi (z + x + 1/2)(z' + x + 1/2))``."""
    _require_half(w)
    if not isinstance(ps, (Principal, Complementary, Degenerate1)):
        raise ValueError(f"hypergeometric operator needs the principal, complementary or first degenerate series, got {ps.series}")
    xi = ps.xi
    x = w.x
    diag = -(x + xi * (ps.z_plus_zp + x))
    prods = np.array([ps.product_at(k) for k in x[:-1] + 0.5])
    if np.any(prods < 0):
        bad = x[:-1][prods < 0][0]
        raise ValueError(f"(z + k)(z' + k) < 0 at the bond {bad} -> {bad + 1}: parameters outside the validated regime")
    offdiag = np.sqrt(xi * prods)
    return TridiagonalOperator(w, diag, offdiag, "hypergeometric", ps.to_json())


def build_bessel(theta: float, w: Window) -> TridiagonalOperator:
    """Discrete Bessel operator: ``d[x] = -x``, ``e[x] = sqrt(theta)``."""
    _require_half(w)
    if not theta > 0:
        raise ValueError("theta must be positive")
    diag = -w.x.astype(float)
    offdiag = np.full(w.size - 1, math.sqrt(theta))
    return TridiagonalOperator(w, diag, offdiag, "bessel", {"theta": theta})


def build_sine(c: float, w: Window) -> TridiagonalOperator:
    """Discrete sine operator on the integer lattice: ``d = -2c``, ``e = 1``."""
    if w.lattice != "int":
        raise ValueError("the sine operator lives on the integer lattice")
    if not -1 < c < 1:
        raise ValueError("c must lie in (-1, 1)")
    return TridiagonalOperator(w, np.full(w.size, -2.0 * c), np.ones(w.size - 1), "sine", {"c": c})


def build_gamma(ps: ParamSet, w: Window) -> TridiagonalOperator:
    """Gamma operator (the hypergeometric one at ``xi = 1``):
    ``d[x] = -(z + z' + 2x)``, ``e[x] = sqrt((z + x + 1/2)(z' + x + 1/2))``."""
    _require_half(w)
    if not isinstance(ps, (Principal, Complementary)):
        raise ValueError(f"gamma operator needs the principal or complementary series, got {ps.series}")
    x = w.x
    diag = -(ps.z_plus_zp + 2.0 * x)
    prods = np.array([ps.product_at(k) for k in x[:-1] + 0.5])
    if np.any(prods < 0):
        raise ValueError("(z + k)(z' + k) < 0 inside the window")
    params = {k: v for k, v in ps.to_json().items() if k != "xi"}
    return TridiagonalOperator(w, diag, np.sqrt(prods), "gamma", params)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # first component above 1e-8 of the column max is made positive
    absV = np.abs(V)
    thresh = 1e-8 * absV.max(axis=0)
    first = np.argmax(absV > thresh, axis=0)
    signs = np.sign(V[first, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def tridiagonal_ql(diag: np.ndarray, offdiag: np.ndarray, max_iter: int = QL_MAX_ITER) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-shift QL iteration with Wilkinson shifts for a symmetric tridiagonal matrix.

    Returns unsorted eigenvalues and the matrix whose columns are the
    corresponding eigenvectors.

    Raises
    ------
    EigenConvergenceError
        If some eigenvalue needs more than ``max_iter`` sweeps.
    """
    d = np.array(diag, dtype=float)
    n = len(d)
    e = np.zeros(n)
    e[: n - 1] = offdiag
    Z = np.eye(n)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= eps * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise EigenConvergenceError(f"no convergence for eigenvalue {l} after {max_iter} iterations")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = Z[:, i].copy()
                Z[:, i] = c * zi - s * Z[:, i + 1]
                Z[:, i + 1] = s * zi + c * Z[:, i + 1]
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, Z


def eigh_tridiagonal(T: TridiagonalOperator, method: str = "lapack") -> EigenDecomposition:
    """Full eigendecomposition of a tridiagonal operator.

    Parameters
    ----------
    method : {"lapack", "ql"}
        ``"lapack"`` calls LAPACK's MRRR driver through SciPy; ``"ql"`` runs
        :func:`tridiagonal_ql` (quadratic Python loop, meant for windows of a
        few hundred sites and for cross-checking).

    Eigenvalues come back ascending; each eigenvector has its first
    non-negligible component positive.
    """
    n = T.window.size
    if n > MAX_EIGEN_SIZE:
        raise ValueError(f"window of {n} sites exceeds the eigensolver limit {MAX_EIGEN_SIZE}")
    if method == "lapack":
        try:
            vals, vecs = scipy.linalg.eigh_tridiagonal(T.diag, T.offdiag, lapack_driver="stemr")
        except np.linalg.LinAlgError as exc:
            raise EigenConvergenceError(str(exc)) from exc
    elif method == "ql":
        vals, vecs = tridiagonal_ql(T.diag, T.offdiag)
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(vecs))):
        raise EigenConvergenceError("eigensolver returned non-finite values")
    return EigenDecomposition(vals, _fix_signs(vecs), T.window, T.kind, dict(T.params))


def zero_gap_tolerance(E: EigenDecomposition) -> float:
    """Half-width of the spectral gap around 0 that no eigenvalue may enter.

    ``(1 - xi)/4`` for the hypergeometric operator, ``1/4`` for the Bessel
    one, and 0 for the gapless gamma and sine operators.
    """
    if E.kind == "hypergeometric":
        return (1.0 - E.params["xi"]) / 4.0
    if E.kind == "bessel":
        return 0.25
    return 0.0


def proj_plus(E: EigenDecomposition, w: Window | None = None, sites=None, zero_gap: float | None = None) -> KernelMatrix:
    """Matrix of the projection onto eigenvectors with positive eigenvalue.

    Parameters
    ----------
    E : EigenDecomposition
    w : Window, optional
        Truncation window of ``E`` (defaults to ``E.window``).
    sites : array of int, optional
        Doubled coordinates of the rows/columns to keep; all by default.
    zero_gap : float, optional
        Overrides :func:`zero_gap_tolerance`.

    Raises
    ------
    SpectralGapError
        If an eigenvalue lies in ``[-zero_gap, zero_gap]``.
    """
    w = E.window if w is None else w
    gap = zero_gap_tolerance(E) if zero_gap is None else zero_gap
    vals = E.eigenvalues
    if gap > 0:
        inside = np.abs(vals) <= gap
    else:
        inside = vals == 0.0
    if np.any(inside):
        raise SpectralGapError(f"eigenvalue {vals[inside][0]:.3e} inside the zero gap of half-width {gap:.3e}")
    pos = vals > 0
    if sites is None:
        sites = w.twice
        rows = slice(None)
    else:
        sites = np.asarray(sites, dtype=np.int64)
        rows = w.index_of(sites)
    P = E.eigenvectors[rows][:, pos]
    K = P @ P.T
    K = 0.5 * (K + K.T)
    near_zero = int(np.sum(np.abs(vals) <= 10.0 / w.half_width))
    provenance = {
        "operator": E.kind,
        "params": E.params,
        "truncation_M": w.half_width,
        "truncation_offset": w.offset,
        "n_positive": int(pos.sum()),
        "gapless": gap == 0.0,
        "near_zero_eigenvalues": near_zero,
        "min_abs_eigenvalue": float(np.min(np.abs(vals))),
    }
    return KernelMatrix(np.array(sites, dtype=np.int64), K, provenance)


def spectrum_lattice_check(E: EigenDecomposition, spacing: float, offset_lattice: str = "half", leak: float = 1e-6) -> dict:
    """Distance of the bulk eigenvalues to the lattice ``spacing * (Z + 1/2)``.

    An eigenvalue is in the bulk when its eigenvector keeps all but ``leak``
    of its squared norm inside the middle half of the window; for those the
    Dirichlet truncation is invisible.  (Sorting the spectrum and taking its
    middle half is not enough: hypergeometric eigenvectors spread over a
    range several times their eigenvalue.)

    Raises
    ------
    ValueError
        For operators whose spectrum is not a lattice (sine, gamma), or when
        no eigenvector is localized in the middle half.
    """
    if E.kind in ("sine", "gamma"):
        raise ValueError(f"the {E.kind} operator has continuous spectrum; no lattice to compare with")
    shift = 0.5 if offset_lattice == "half" else 0.0
    w = E.window
    middle = np.abs(w.x - w.offset) <= w.half_width / 2.0
    inside = (E.eigenvectors[middle] ** 2).sum(axis=0)
    bulk = E.eigenvalues[inside >= 1.0 - leak]
    if not len(bulk):
        raise ValueError("no eigenvector is localized in the middle half of the window")
    scaled = bulk / spacing - shift
    dev = np.abs(scaled - np.round(scaled)) * spacing
    return {
        "spacing": spacing,
        "lattice": offset_lattice,
        "n_bulk": len(bulk),
        "bulk_eigenvalues": bulk,
        "max_deviation": float(dev.max()),
        "deviations": dev,
    }
