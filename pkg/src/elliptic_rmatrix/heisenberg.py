"""Finite Heisenberg group, its projective basis ``T_a`` and tensor units.

Conventions
-----------
* ``Q = diag(e_m(1), ..., e_m(m-1), 1)`` and ``Lambda`` is the cyclic
  shift with ones on the superdiagonal, so ``Q Lambda = e_m(-1) Lambda Q``.
* ``T_a = (m / 2 pi i) e_m(a1 a2 / 2) Q^a1 Lambda^a2``.  For integer pairs
  that are not reduced, ``T_{a + m c} = +-T_a``; the products
  ``T_a (x) T_{-a}`` are insensitive to the sign.
* ``gl(N) = gl(p) (x) gl(l)`` with the ``gl(p)`` factor outermost: basis
  vector ``(i, alpha)`` sits at position ``i * l + alpha``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class LatticeIndex:
    """Element of ``Gamma_m = (Z/mZ)^2``, stored reduced.

    Args:
        a1, a2: integers (reduced mod ``m`` on construction).
        m: lattice order, ``m >= 1``.
    """

    a1: int
    a2: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("lattice order must be >= 1")
        object.__setattr__(self, "a1", int(self.a1) % self.m)
        object.__setattr__(self, "a2", int(self.a2) % self.m)

    def __add__(self, other: "LatticeIndex") -> "LatticeIndex":
        _same_order(self, other)
        return LatticeIndex(self.a1 + other.a1, self.a2 + other.a2, self.m)

    def __neg__(self) -> "LatticeIndex":
        return LatticeIndex(-self.a1, -self.a2, self.m)

    def __sub__(self, other: "LatticeIndex") -> "LatticeIndex":
        return self + (-other)

    def cross(self, other: "LatticeIndex") -> int:
        """``a x b = a1 b2 - a2 b1`` on the reduced representatives."""
        _same_order(self, other)
        return self.a1 * other.a2 - self.a2 * other.a1

    @property
    def is_zero(self) -> bool:
        return self.a1 == 0 and self.a2 == 0

    def pair(self) -> tuple[int, int]:
        return (self.a1, self.a2)


def _same_order(a: LatticeIndex, b: LatticeIndex) -> None:
    if a.m != b.m:
        raise DomainError(f"lattice orders differ: {a.m} vs {b.m}")


def lattice(m: int, include_zero: bool = True) -> list[LatticeIndex]:
    """All elements of ``Gamma_m`` (or of ``Gamma_m`` minus zero)."""
    if m < 1:
        raise DomainError("lattice order must be >= 1")
    out = [LatticeIndex(a1, a2, m) for a1 in range(m) for a2 in range(m)]
    if not include_zero:
        out = [a for a in out if not a.is_zero]
    return out


# dense operators ----------------------------------------------------------

class DenseOperator:
    """Dense square matrix acting on a tensor product of equal factors.

    Args:
        entries: square complex matrix.
        factor_dims: dimension of each tensor factor.

    Raises:
        DomainError: when the shape does not match ``prod(factor_dims)``.
    """

    __array_priority__ = 1000

    def __init__(self, entries, factor_dims: Sequence[int]):
        entries = np.asarray(entries, dtype=complex)
        dims = tuple(int(d) for d in factor_dims)
        total = int(np.prod(dims))
        if entries.shape != (total, total):
            raise DomainError(f"shape {entries.shape} does not match factor dims {dims}")
        if not 1 <= len(dims) <= 3:
            raise DomainError("between one and three tensor factors are supported")
        self.entries = entries
        self.factor_dims = dims

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            if other.factor_dims != self.factor_dims:
                raise DomainError("factor structures differ")
            return DenseOperator(self.entries @ other.entries, self.factor_dims)
        return self.entries @ np.asarray(other)

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.entries + np.asarray(other), self.factor_dims)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.entries - np.asarray(other), self.factor_dims)

    def __mul__(self, c) -> "DenseOperator":
        return DenseOperator(self.entries * c, self.factor_dims)

    __rmul__ = __mul__

    def kron(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(np.kron(self.entries, other.entries),
                             self.factor_dims + other.factor_dims)

    def swap(self) -> "DenseOperator":
        """Conjugate a two-factor operator by the flip ``P``: ``R_12 -> R_21``."""
        if self.n_factors != 2:
            raise DomainError("swap needs exactly two factors")
        n1, n2 = self.factor_dims
        t = self.entries.reshape(n1, n2, n1, n2).transpose(1, 0, 3, 2)
        return DenseOperator(t.reshape(n1 * n2, n1 * n2), (n2, n1))

    def partial_transpose(self, factor: int) -> "DenseOperator":
        """Transpose on one tensor factor (0-based)."""
        d = self.factor_dims
        k = len(d)
        t = self.entries.reshape(d + d)
        axes = list(range(2 * k))
        axes[factor], axes[k + factor] = axes[k + factor], axes[factor]
        total = int(np.prod(d))
        return DenseOperator(t.transpose(axes).reshape(total, total), d)

    def __repr__(self) -> str:
        return f"DenseOperator(factor_dims={self.factor_dims})"


# Heisenberg generators ----------------------------------------------------

def _check_order(m: int) -> None:
    if int(m) != m or m < 1:
        raise DomainError(f"matrix order must be a positive integer, got {m}")


def clock_matrix(m: int) -> DenseOperator:
    """``Q = diag(e_m(1), ..., e_m(m-1), e_m(m) = 1)``."""
    _check_order(m)
    return DenseOperator(np.diag(np.exp(TWO_PI_I * np.arange(1, m + 1) / m)), (m,))


def shift_matrix(m: int) -> DenseOperator:
    """Cyclic shift with ones at ``(i, i+1 mod m)``."""
    _check_order(m)
    return DenseOperator(np.roll(np.eye(m), 1, axis=1), (m,))


def _pair(a) -> tuple[int, int]:
    if isinstance(a, LatticeIndex):
        return a.a1, a.a2
    a1, a2 = a
    return int(a1), int(a2)


def t_basis(a, m: int) -> DenseOperator:
    """``T_a = (m / 2 pi i) e_m(a1 a2 / 2) Q^a1 Lambda^a2``.

    Args:
        a: :class:`LatticeIndex` (uses reduced representatives) or an
            integer pair (used as given, negative entries allowed).
        m: matrix order.
    """
    _check_order(m)
    a1, a2 = _pair(a)
    qdiag = np.exp(TWO_PI_I * a1 * np.arange(1, m + 1) / m)
    lam = np.roll(np.eye(m), a2 % m, axis=1)
    pref = (m / TWO_PI_I) * np.exp(TWO_PI_I * a1 * a2 / (2 * m))
    return DenseOperator(pref * (qdiag[:, None] * lam), (m,))


def kappa(a, b, m: int | None = None) -> complex:
    """Cocycle ``kappa_{a,b} = (m / 2 pi i) e_m(-(a x b) / 2)``.

    With :class:`LatticeIndex` arguments the orders must agree.  Integer
    pairs need ``m`` and are used unreduced, matching ``T_a T_b =
    kappa_{a,b} T_{a+b}`` with ``a + b`` the integer sum.
    """
    if isinstance(a, LatticeIndex) or isinstance(b, LatticeIndex):
        if not (isinstance(a, LatticeIndex) and isinstance(b, LatticeIndex)):
            raise DomainError("mixed lattice index types")
        _same_order(a, b)
        if m is not None and m != a.m:
            raise DomainError("lattice order mismatch")
        m = a.m
    if m is None:
        raise DomainError("lattice order required for integer pairs")
    a1, a2 = _pair(a)
    b1, b2 = _pair(b)
    cross = a1 * b2 - a2 * b1
    return complex((m / TWO_PI_I) * np.exp(-TWO_PI_I * cross / (2 * m)))


def structure_constant(a, b, m: int) -> float:
    """Coefficient in ``[T_a, T_b] = C(a, b) T_{a+b}``.

    ``C(a, b) = kappa_{a,b} - kappa_{b,a} = (m / pi) sin(pi (b x a) / m)``;
    note the order ``b x a`` forced by the cocycle sign.
    """
    a1, a2 = _pair(a)
    b1, b2 = _pair(b)
    return float(m / np.pi * np.sin(np.pi * (b1 * a2 - b2 * a1) / m))


# tensor units --------------------------------------------------------------

@dataclass(frozen=True)
class BasisElement:
    """Label ``(i, j, a)`` of ``E^a_ij = E_ij (x) T_a`` (0-based ``i, j``)."""

    i: int
    j: int
    a: LatticeIndex


def matrix_unit(i: int, j: int, p: int) -> np.ndarray:
    if not (0 <= i < p and 0 <= j < p):
        raise DomainError(f"index ({i}, {j}) out of range for p={p}")
    out = np.zeros((p, p), dtype=complex)
    out[i, j] = 1.0
    return out


def tensor_unit(e: BasisElement, p: int, l: int) -> DenseOperator:
    """``E_ij (x) T_a`` as an ``N x N`` matrix, ``N = p l``."""
    if e.a.m != l:
        raise DomainError(f"lattice index of order {e.a.m} used with l={l}")
    eij = matrix_unit(e.i, e.j, p)
    return DenseOperator(np.kron(eij, t_basis(e.a, l).entries), (p * l,))


def basis_elements(p: int, l: int) -> Iterator[BasisElement]:
    for i in range(p):
        for j in range(p):
            for a in lattice(l):
                yield BasisElement(i, j, a)


# interleaver ---------------------------------------------------------------

def block_cartan(u: Sequence[complex], l: int) -> np.ndarray:
    """``diag(u_1..u_p, u_1..u_p, ...)``: ``l`` repeated copies of ``u``."""
    return np.diag(np.tile(np.asarray(u, dtype=complex), l))


def _perm_matrix(pos: Sequence[int]) -> np.ndarray:
    # column k has its one in row pos[k]: S e_k = e_pos[k]
    n = len(pos)
    S = np.zeros((n, n))
    S[list(pos), list(range(n))] = 1.0
    return S


def interleaver_residuals(S: np.ndarray, p: int, l: int, u=None) -> tuple[float, float, float]:
    """Residuals of the three block-form identities for a candidate ``S``.

    Checked: ``S u S^-1 = (+)_J u_J Id_l``,
    ``S Q S^-1 = (+)_J e((J - p)/N) Q_l`` (``J = 1..p``) and
    ``S Lambda^p S^-1 = (+)_J Lambda_l``.
    """
    N = p * l
    if u is None:
        u = np.arange(1, p + 1) * (1.0 + 0.37j)
    Sinv = S.T
    Q = clock_matrix(N).entries
    Lp = np.linalg.matrix_power(shift_matrix(N).entries, p)
    target_u = np.kron(np.diag(np.asarray(u, dtype=complex)), np.eye(l))
    ql = clock_matrix(l).entries
    target_q = np.zeros((N, N), dtype=complex)
    for J in range(1, p + 1):
        blk = slice((J - 1) * l, J * l)
        target_q[blk, blk] = np.exp(TWO_PI_I * (J - p) / N) * ql
    target_l = np.kron(np.eye(p), shift_matrix(l).entries)
    r1 = np.abs(S @ block_cartan(u, l) @ Sinv - target_u).max()
    r2 = np.abs(S @ Q @ Sinv - target_q).max()
    r3 = np.abs(S @ Lp @ Sinv - target_l).max()
    return float(r1), float(r2), float(r3)


def interleaver(p: int, l: int, tol: float = 1e-12) -> DenseOperator:
    """Permutation ``S`` bringing the Heisenberg data into ``p`` blocks of size ``l``.

    The search runs over bijections ``(J, alpha) -> J' l + (alpha + s) mod l``
    built from a permutation ``J -> J'`` of the ``p`` residue classes and a
    cyclic offset ``s``; the first candidate meeting all identities in
    :func:`interleaver_residuals` is returned.

    Raises:
        RuntimeError: if no candidate works (a conventions bug).
    """
    if p < 1 or l < 1:
        raise DomainError("p and l must be positive")
    N = p * l
    for order in itertools.permutations(range(p)):
        for s in range(l):
            pos = [0] * N
            for J in range(p):
                for alpha in range(l):
                    k = alpha * p + J  # old position of (J, alpha)
                    pos[k] = order[J] * l + (alpha + s) % l
            S = _perm_matrix(pos)
            if max(interleaver_residuals(S, p, l)) < tol:
                return DenseOperator(S, (N,))
    raise RuntimeError(f"no interleaving permutation found for p={p}, l={l}")
