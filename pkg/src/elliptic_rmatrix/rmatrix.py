"""Elliptic R-matrices on V (x) V with V = C^p (x) C^l, N = p l.

Families
--------
``vertex``
    Non-dynamical, ``p = 1``:  ``R = sum_a phi_a(hbar, z) T_a (x) T_-a``.
``felder``
    Fully dynamical, ``l = 1``: ``r_ij = phi(u_ij + delta_ij hbar, z)`` on
    ``E_ij (x) E_ji`` and ``rho_ij = phi(-u_ij, hbar)`` on ``E_ii (x) E_jj``.
``intermediate``
    General ``(p, l)``: ``r^a_ij = phi_{-a}(-u_ij - delta_ij hbar, z)`` on
    ``E^a_ij (x) E^-a_ji`` and a Cartan term ``rho_ij`` on ``E^0_ii (x) E^0_jj``.
    The default ``rho_ij = l phi(l u_ij, -l hbar)`` is the normalization
    under which the dynamical Yang-Baxter equation holds for ``l > 1``;
    ``rho="unscaled"`` gives ``phi(-l u_ij, l hbar)``, which only works at
    ``l = 1``.
``trig`` / ``rational``
    ``Im tau -> infinity`` limit of ``intermediate`` and the leading term
    of the trigonometric one under ``(u, z, hbar) -> eps (u, z, hbar)``.

All builders accept :class:`~elliptic_rmatrix._aux.Bicomplex` entries in
``u`` or ``hbar`` through the private ``raw_*`` functions; that is how
``u``-derivatives for the classical equation are obtained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import elliptic as el
from ._aux import Bicomplex, base
from .errors import DomainError, ExtrapolationError, PoleError
from .heisenberg import DenseOperator, lattice, matrix_unit, t_basis

FAMILIES = ("vertex", "felder", "intermediate", "trig", "rational")
TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class RMatrixSpec:
    """Family and fixed parameters of an R-matrix.

    Args:
        family: one of ``vertex, felder, intermediate, trig, rational``.
        p, l: block sizes, ``N = p l``.
        tau: modular parameter (ignored by ``trig`` and ``rational``).
        hbar: Planck parameter.
        rho: ``"scaled"`` or ``"unscaled"`` Cartan term (intermediate only).
    """

    family: str
    p: int
    l: int
    tau: Optional[el.ModularParam] = None
    hbar: complex = 0.1
    rho: str = "scaled"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.p < 1 or self.l < 1:
            raise DomainError("p and l must be >= 1")
        if self.family == "vertex" and self.p != 1:
            raise DomainError("vertex family requires p = 1")
        if self.family == "felder" and self.l != 1:
            raise DomainError("felder family requires l = 1")
        if self.family in ("vertex", "felder", "intermediate"):
            if self.tau is None:
                raise DomainError("elliptic families need tau")
            if not isinstance(self.tau, el.ModularParam):
                object.__setattr__(self, "tau", el.ModularParam(self.tau))
        if self.rho not in ("scaled", "unscaled"):
            raise DomainError("rho must be 'scaled' or 'unscaled'")

    @property
    def N(self) -> int:
        return self.p * self.l

    @property
    def dynamical(self) -> bool:
        return self.family != "vertex"

    def with_(self, **kw) -> "RMatrixSpec":
        d = dict(family=self.family, p=self.p, l=self.l, tau=self.tau,
                 hbar=self.hbar, rho=self.rho)
        d.update(kw)
        return RMatrixSpec(**d)


# basis tensors ----------------------------------------------------------------

@lru_cache(maxsize=64)
def _heis_terms(p: int, l: int):
    """Stacked ``E^a_ij (x) E^-a_ji`` and ``E^0_ii (x) E^0_jj`` (i != j)."""
    n = p * l
    labels, mats = [], []
    for i in range(p):
        for j in range(p):
            for a in lattice(l):
                A = np.kron(matrix_unit(i, j, p), t_basis(a, l).entries)
                # unreduced -a: T_a (x) T_-a is sign-free only for the integer negative
                B = np.kron(matrix_unit(j, i, p), t_basis((-a.a1, -a.a2), l).entries)
                labels.append((i, j, a))
                mats.append(np.kron(A, B))
    rlabels, rmats = [], []
    t0 = t_basis((0, 0), l).entries
    for i in range(p):
        for j in range(p):
            if i != j:
                A = np.kron(matrix_unit(i, i, p), t0)
                B = np.kron(matrix_unit(j, j, p), t0)
                rlabels.append((i, j))
                rmats.append(np.kron(A, B))
    shape = (0, n * n, n * n)
    K = np.array(mats) if mats else np.zeros(shape, complex)
    Kr = np.array(rmats) if rmats else np.zeros(shape, complex)
    return tuple(labels), K, tuple(rlabels), Kr


@lru_cache(maxsize=16)
def _felder_terms(N: int):
    """Stacked ``E_ij (x) E_ji`` and ``E_ii (x) E_jj`` (i != j), plain units."""
    labels, mats, rlabels, rmats = [], [], [], []
    for i in range(N):
        for j in range(N):
            labels.append((i, j))
            mats.append(np.kron(matrix_unit(i, j, N), matrix_unit(j, i, N)))
            if i != j:
                rlabels.append((i, j))
                rmats.append(np.kron(matrix_unit(i, i, N), matrix_unit(j, j, N)))
    return tuple(labels), np.array(mats), tuple(rlabels), np.array(rmats)


def _assemble(coeffs: list, K: np.ndarray):
    """``sum_k coeffs[k] K[k]``; Bicomplex coefficients give a Bicomplex matrix."""
    if not coeffs:
        return np.zeros(K.shape[1:], dtype=complex)
    if any(isinstance(c, Bicomplex) for c in coeffs):
        cs = [c if isinstance(c, Bicomplex) else Bicomplex(c, 0.0) for c in coeffs]
        return Bicomplex(_assemble([c.a for c in cs], K), _assemble([c.b for c in cs], K))
    return np.tensordot(np.asarray(coeffs, dtype=complex), K, axes=1)


def _add(x, y):
    return x + y


def _uvec(u, p: int) -> list:
    if u is None:
        u = [0.0] * p
    u = list(u)
    if len(u) != p:
        raise DomainError(f"dynamical vector must have {p} entries, got {len(u)}")
    return u


def _tag(err: PoleError, where: str) -> PoleError:
    err.where = where if not err.where else f"{where}: {err.where}"
    return PoleError(f"{err} [{where}]", point=err.point, nearest=err.nearest, where=err.where)


# elliptic families --------------------------------------------------------------

def raw_vertex(N: int, z, hbar, tau, eps: float = el.EPS_POLE):
    """Entries of the vertex R-matrix (ndarray, or Bicomplex of ndarrays)."""
    labels, K, _, _ = _heis_terms(1, N)
    coeffs = []
    for (_, _, a) in labels:
        try:
            coeffs.append(el.phi_deformed(a, N, hbar, z, tau, eps))
        except PoleError as exc:
            raise _tag(exc, f"vertex term a={a.pair()}") from None
    return _assemble(coeffs, K)


def raw_felder(N: int, u, z, hbar, tau, eps: float = el.EPS_POLE, drop_rho: bool = False):
    labels, K, rlabels, Kr = _felder_terms(N)
    u = _uvec(u, N)
    coeffs = []
    for (i, j) in labels:
        x = u[i] - u[j] + (hbar if i == j else 0.0)
        try:
            coeffs.append(el.phi(x, z, tau, eps))
        except PoleError as exc:
            raise _tag(exc, f"felder r_({i},{j})") from None
    R = _assemble(coeffs, K)
    if drop_rho:
        return R
    rc = []
    for (i, j) in rlabels:
        try:
            rc.append(el.phi(-(u[i] - u[j]), hbar, tau, eps))
        except PoleError as exc:
            raise _tag(exc, f"felder rho_({i},{j})") from None
    return _add(R, _assemble(rc, Kr))


def _rho_coeff(uij, hbar, l: int, tau, eps, rho: str):
    if rho == "unscaled":
        return el.phi(-l * uij, l * hbar, tau, eps)
    return l * el.phi(l * uij, -l * hbar, tau, eps)


def raw_intermediate(p: int, l: int, u, z, hbar, tau, eps: float = el.EPS_POLE,
                     rho: str = "scaled"):
    labels, K, rlabels, Kr = _heis_terms(p, l)
    u = _uvec(u, p)
    coeffs = []
    for (i, j, a) in labels:
        x = u[i] - u[j] + (hbar if i == j else 0.0)
        try:
            coeffs.append(el.phi_deformed(-a, l, -x, z, tau, eps))
        except PoleError as exc:
            raise _tag(exc, f"intermediate r^a_(i,j) i={i} j={j} a={a.pair()}") from None
    rc = []
    for (i, j) in rlabels:
        try:
            rc.append(_rho_coeff(u[i] - u[j], hbar, l, tau, eps, rho))
        except PoleError as exc:
            raise _tag(exc, f"intermediate rho_(i,j) i={i} j={j}") from None
    return _add(_assemble(coeffs, K), _assemble(rc, Kr))


def raw_trig(p: int, l: int, u, z, hbar):
    labels, K, rlabels, Kr = _heis_terms(p, l)
    u = _uvec(u, p)
    coeffs = []
    for (i, j, a) in labels:
        x = u[i] - u[j] + (hbar if i == j else 0.0)
        coeffs.append(el.phi_deformed_trig(-a, l, -x, z))
    rc = [l * el.phi_trig(l * (u[i] - u[j]), -l * hbar) for (i, j) in rlabels]
    return _add(_assemble(coeffs, K), _assemble(rc, Kr))


def raw_rational(p: int, l: int, u, z, hbar):
    labels, K, rlabels, Kr = _heis_terms(p, l)
    u = _uvec(u, p)
    coeffs = []
    for (i, j, a) in labels:
        x = u[i] - u[j] + (hbar if i == j else 0.0)
        coeffs.append(el.phi_deformed_rational(-a, l, -x, z))
    rc = [l * el.phi_rational(l * (u[i] - u[j]), -l * hbar) for (i, j) in rlabels]
    return _add(_assemble(coeffs, K), _assemble(rc, Kr))


def raw_build(spec: RMatrixSpec, u, z, hbar=None, eps: float = el.EPS_POLE):
    """Dispatch to the raw builder of ``spec.family``.

    ``hbar`` overrides ``spec.hbar`` (used by the classical-limit code).
    """
    h = spec.hbar if hbar is None else hbar
    f = spec.family
    if f == "vertex":
        return raw_vertex(spec.N, z, h, spec.tau, eps)
    if f == "felder":
        return raw_felder(spec.N, u, z, h, spec.tau, eps)
    if f == "intermediate":
        return raw_intermediate(spec.p, spec.l, u, z, h, spec.tau, eps, spec.rho)
    if f == "trig":
        return raw_trig(spec.p, spec.l, u, z, h)
    return raw_rational(spec.p, spec.l, u, z, h)


def build(spec: RMatrixSpec, u, z, hbar=None, eps: float = el.EPS_POLE) -> DenseOperator:
    """R-matrix of ``spec`` at ``(u, z)`` as a two-factor operator."""
    return DenseOperator(raw_build(spec, u, z, hbar, eps), (spec.N, spec.N))


def build_vertex(N: int, z, hbar, tau) -> DenseOperator:
    """Vertex R-matrix ``sum_a phi_deformed(a, N, hbar, z) T_a (x) T_-a``.

    Raises:
        PoleError: naming the lattice index ``a`` of the offending term.
    """
    return DenseOperator(raw_vertex(N, z, hbar, tau), (N, N))


def build_felder(N: int, u: Sequence[complex], z, hbar, tau) -> DenseOperator:
    """Felder R-matrix on ``C^N (x) C^N``.

    Raises:
        PoleError: naming the pair ``(i, j)`` of the offending term.
    """
    return DenseOperator(raw_felder(N, u, z, hbar, tau), (N, N))


def build_intermediate(p: int, l: int, u: Sequence[complex], z, hbar, tau,
                       rho: str = "scaled") -> DenseOperator:
    """Intermediate R-matrix for ``gl(p) (x) gl(l)``.

    Args:
        p, l: block sizes.
        u: dynamical vector of length ``p``; only differences enter.
        z: spectral parameter.
        hbar: Planck parameter.
        tau: modular parameter.
        rho: ``"scaled"`` (default) or ``"unscaled"`` Cartan term.

    Raises:
        PoleError: naming the term ``(i, j, a)`` that hit a pole.
    """
    N = p * l
    return DenseOperator(raw_intermediate(p, l, u, z, hbar, tau, rho=rho), (N, N))


def build_trig(p: int, l: int, u: Sequence[complex], z, hbar) -> DenseOperator:
    """Trigonometric limit of :func:`build_intermediate`."""
    N = p * l
    return DenseOperator(raw_trig(p, l, u, z, hbar), (N, N))


def build_rational(p: int, l: int, u: Sequence[complex], z, hbar) -> DenseOperator:
    """Rational limit of :func:`build_trig`."""
    N = p * l
    return DenseOperator(raw_rational(p, l, u, z, hbar), (N, N))


# degeneration maps ----------------------------------------------------------------

def vertex_from_intermediate(R_int: np.ndarray) -> np.ndarray:
    """Map the ``(1, N)`` intermediate matrix at ``-z`` to the vertex matrix at ``z``.

    ``intermediate(1, N; z) = -vertex(N; -z)``.
    """
    return -np.asarray(R_int)


def felder_from_intermediate(R_int: np.ndarray) -> np.ndarray:
    """Map the ``(N, 1)`` intermediate matrix at ``-z`` to Felder's at ``z``.

    ``intermediate(N, 1; u, z) = -(2 pi i)^-2 felder(N; u, -z)``.
    """
    return -(TWO_PI_I ** 2) * np.asarray(R_int)


# classical limits -----------------------------------------------------------------

@dataclass
class ClassicalRMatrix:
    """Classical r-matrix together with how it was obtained.

    Attributes:
        r: operator on V (x) V, divided by ``normalization``.
        family: family tag.
        normalization: scalar ``lambda`` with ``R = lambda (Id/hbar + r) + O(hbar)``.
        error_estimate: Richardson error estimate (numeric limits only).
    """

    r: DenseOperator
    family: str
    normalization: complex = 1.0
    error_estimate: float = 0.0
    meta: dict = field(default_factory=dict)


def _hat_t(a, m: int) -> np.ndarray:
    return t_basis(a, m).entries * (TWO_PI_I / m)


def raw_classical(family: str, N: int, z, u=None, tau=None, drop_cartan: bool = False,
                  eps: float = el.EPS_POLE):
    """Closed-form classical r-matrix entries.

    ``vertex``: ``E_1(z) Id + sum_{a != 0} phi_deformed(a, N, 0, z) T'_a (x) T'_-a``
    with the unit-normalized ``T'_a = (2 pi i / N) T_a``.

    ``felder``: ``E_1(z) sum_i E_ii (x) E_ii + sum_{i != j} phi(z, u_ij) E_ij (x) E_ji
    - sum_{i != j} E_1(u_ij) E_ii (x) E_jj``; ``drop_cartan`` removes the last sum.
    """
    if family == "vertex":
        out = el.E1(z, tau, eps) * np.eye(N * N, dtype=complex)
        for a in lattice(N, include_zero=False):
            c = el.phi_deformed(a, N, 0.0, z, tau, eps)
            out = out + c * np.kron(_hat_t(a, N), _hat_t((-a.a1, -a.a2), N))
        return out
    if family == "felder":
        u = _uvec(u, N)
        coeffs, mats = [], []
        e1z = el.E1(z, tau, eps)
        for i in range(N):
            for j in range(N):
                if i == j:
                    coeffs.append(e1z)
                    mats.append(np.kron(matrix_unit(i, i, N), matrix_unit(i, i, N)))
                else:
                    coeffs.append(el.phi(z, u[i] - u[j], tau, eps))
                    mats.append(np.kron(matrix_unit(i, j, N), matrix_unit(j, i, N)))
                    if not drop_cartan:
                        coeffs.append(-el.E1(u[i] - u[j], tau, eps))
                        mats.append(np.kron(matrix_unit(i, i, N), matrix_unit(j, j, N)))
        return _assemble(coeffs, np.array(mats))
    raise DomainError("closed-form classical r-matrices exist for vertex and felder only")


def classical_r(family: str, N: int, z, u=None, tau=None, drop_cartan: bool = False) -> ClassicalRMatrix:
    """Closed-form classical r-matrix (see :func:`raw_classical`)."""
    r = raw_classical(family, N, z, u, tau, drop_cartan)
    return ClassicalRMatrix(DenseOperator(r, (N, N)), family, 1.0,
                            meta={"drop_cartan": drop_cartan})


def richardson(values: Sequence, hs: Sequence[float]):
    """Polynomial extrapolation of ``values[k] = G(hs[k])`` to ``h = 0``.

    Neville's scheme: ``T[i][k] = T[i][k-1] + (T[i][k-1] - T[i-1][k-1]) h_i / (h_{i-k} - h_i)``.

    Returns:
        ``(estimate, error)`` where ``error`` is the max-abs difference of
        the two highest-order estimates.
    """
    if len(values) != len(hs) or len(hs) < 2:
        raise DomainError("need at least two samples with matching step sizes")
    table = [[v] for v in values]
    for i in range(1, len(hs)):
        for k in range(1, i + 1):
            prev = table[i][k - 1]
            diff = prev - table[i - 1][k - 1]
            table[i].append(prev + diff * (hs[i] / (hs[i - k] - hs[i])))
    best = table[-1][-1]
    err = _maxabs(best - table[-1][-2])
    return best, err


def _maxabs(x) -> float:
    if isinstance(x, Bicomplex):
        return max(_maxabs(x.a), _maxabs(x.b))
    return float(np.max(np.abs(x)))


def _trace(x):
    if isinstance(x, Bicomplex):
        return Bicomplex(_trace(x.a), _trace(x.b))
    return np.trace(x)


DEFAULT_HBARS = (1e-2, 5e-3, 2.5e-3)


def classical_limit_numeric(builder, u=None, z=None,
                            hbar_samples: Sequence[float] = DEFAULT_HBARS,
                            radius: float = 0.05, n_contour: int = 32,
                            rtol: float = 1e-4, normalize: bool = True,
                            symmetric: bool = True) -> ClassicalRMatrix:
    """Extract ``r`` from ``R(hbar) = lambda (Id / hbar + r) + O(hbar)``.

    The leading coefficient ``L = lambda Id`` is measured as the residue at
    ``hbar = 0`` by the trapezoid rule on a circle; ``G(hbar) = R(hbar) - L/hbar``
    is then Richardson-extrapolated over ``hbar_samples``.

    Args:
        builder: an :class:`RMatrixSpec` (evaluated at ``u, z``) or a callable
            ``hbar -> matrix``.
        u, z: evaluation point when ``builder`` is a spec.
        hbar_samples: at least three geometrically spaced step sizes.
        radius, n_contour: residue contour.
        rtol: relative tolerance on the Richardson error estimate.
        normalize: divide by ``lambda`` (otherwise ``lambda = 1`` is reported).
        symmetric: average ``G(hbar)`` and ``G(-hbar)`` and extrapolate in
            ``hbar**2``; odd orders cancel, so three samples reach ``O(hbar**6)``.

    Raises:
        ExtrapolationError: if the estimate does not settle or the leading
            term is not scalar.
    """
    if len(hbar_samples) < 3:
        raise DomainError("at least three hbar samples are required")
    if isinstance(builder, RMatrixSpec):
        spec = builder
        fn: Callable = lambda h: raw_build(spec, u, z, h)
        family, N = spec.family, spec.N
    else:
        fn = builder
        family, N = "custom", None
    angles = np.exp(2j * np.pi * (np.arange(n_contour) + 0.5) / n_contour)
    L = None
    for w in angles:
        h = radius * w
        term = fn(h) * (h / n_contour)
        L = term if L is None else L + term
    dim = (L.a if isinstance(L, Bicomplex) else L).shape[0]
    lam = _trace(L) * (1.0 / dim)
    lam0 = complex(base(lam))
    Lb = L.a if isinstance(L, Bicomplex) else L
    off = np.abs(Lb - lam0 * np.eye(dim)).max()
    if off > 1e-8 * max(1.0, abs(lam0)):
        raise ExtrapolationError(f"leading hbar coefficient is not scalar (off-scalar {off:.2e})")

    def G(h):
        return fn(h) - L * (1.0 / h)

    if symmetric:
        values = [(G(h) + G(-h)) * 0.5 for h in hbar_samples]
        est, err = richardson(values, [h * h for h in hbar_samples])
    else:
        values = [G(h) for h in hbar_samples]
        est, err = richardson(values, list(hbar_samples))
    scale = max(_maxabs(est), 1e-300)
    if not err <= rtol * scale:
        raise ExtrapolationError(f"Richardson estimate did not settle: error {err:.2e}")
    if normalize:
        r = est / lam if isinstance(lam, Bicomplex) else est * (1.0 / lam)
    else:
        r, lam = est, 1.0
    if isinstance(r, Bicomplex):
        return ClassicalRMatrix(r, family, lam, err / abs(lam0) if normalize else err)  # type: ignore[arg-type]
    if N is not None:
        dims = (N, N)
    else:
        n = int(round(np.sqrt(dim)))
        dims = (n, n) if n * n == dim else (dim,)
    return ClassicalRMatrix(DenseOperator(r, dims), family, complex(lam0) if normalize else 1.0,
                            err / abs(lam0) if normalize else err)
