"""Elliptic special functions on the curve C/(Z + tau Z).

Everything is built on one object: the odd Jacobi theta function

    theta(z) = sum_k e(k^2 tau/2 + k (z + 1/2)),   k in Z + 1/2,

with ``e(x) = exp(2 pi i x)``.  Derivatives in ``z`` are obtained by
differentiating the series term by term, so no step sizes appear.  Every
function accepts :class:`~elliptic_rmatrix._aux.Bicomplex` arguments,
which is how complex-step derivative checks are run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from ._aux import Bicomplex, aexp, asum, base
from .errors import DomainError, PoleError

TWO_PI_I = 2j * np.pi

#: default distance to a pole below which evaluation is refused
EPS_POLE = 1e-8

#: hard cap on the half-width of the theta-series window
MAX_TERMS = 20000


def e(x):
    """``exp(2 pi i x)``."""
    return aexp(TWO_PI_I * x)


def e_m(x, m: int):
    """``exp(2 pi i x / m)``."""
    return aexp(TWO_PI_I * x / m)


@dataclass(frozen=True)
class ModularParam:
    """Modular parameter ``tau`` in the upper half plane.

    Args:
        tau: complex number with positive imaginary part.
        tol: truncation tolerance for theta series; terms whose size
            relative to the largest term is below ``tol * 1e-2`` are
            dropped (two further terms are kept as a margin).

    Raises:
        DomainError: if ``Im tau <= 0`` or ``tol`` is not positive.
    """

    tau: complex
    tol: float = 1e-12

    def __post_init__(self):
        t = complex(base(self.tau))
        if not t.imag > 0:
            raise DomainError(f"Im tau must be positive, got tau={t}")
        if not self.tol > 0:
            raise DomainError("tol must be positive")

    @property
    def q(self) -> complex:
        """Nome ``exp(2 pi i tau)``."""
        return complex(np.exp(TWO_PI_I * complex(self.tau)))


TauLike = Union[ModularParam, complex, float, Bicomplex]


def _unpack_tau(tau: TauLike):
    """Return ``(raw tau, tol)`` from any accepted tau form."""
    if isinstance(tau, ModularParam):
        return tau.tau, tau.tol
    if isinstance(tau, Bicomplex):
        if not complex(base(tau)).imag > 0:
            raise DomainError("Im tau must be positive")
        return tau, 1e-12
    t = complex(tau)
    if not t.imag > 0:
        raise DomainError(f"Im tau must be positive, got tau={t}")
    return t, 1e-12


@dataclass(frozen=True)
class Characteristics:
    """Rational theta characteristics ``[a; b]`` stored exactly."""

    a: Fraction = field(default=Fraction(1, 2))
    b: Fraction = field(default=Fraction(1, 2))

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))


def _window(z, tau, tol: float, a: float = 0.0) -> np.ndarray:
    """Summation indices ``j`` for the series in ``j + a``.

    Centred on the dominant term so the window also works for large
    ``Im z``; symmetric about the centre so oddness survives truncation.
    """
    zb, tb = complex(base(z)), complex(base(tau))
    width = math.sqrt(math.log(100.0 / tol) / (math.pi * tb.imag))
    n0 = int(math.ceil(width)) + 2
    if n0 > MAX_TERMS:
        raise DomainError(f"theta series needs {n0} terms; Im tau too small")
    c = int(round(-zb.imag / tb.imag - a))
    return np.arange(c - n0 - 1, c + n0 + 1)


def theta_derivs(z, tau: TauLike, order: int = 0) -> list:
    """Theta function and its first ``order`` z-derivatives.

    Args:
        z: argument (complex or Bicomplex).
        tau: modular parameter.
        order: highest derivative wanted.

    Returns:
        ``[theta, theta', ..., theta^(order)]`` at ``z``.
    """
    t, tol = _unpack_tau(tau)
    k = _window(z, t, tol, 0.5) + 0.5
    terms = e(k * k * t * 0.5 + k * (z + 0.5))
    out = [asum(terms)]
    w = TWO_PI_I * k
    factor = np.ones_like(w)
    for _ in range(order):
        factor = factor * w
        out.append(asum(terms * factor))
    return out


def theta(z, tau: TauLike):
    """Odd theta function; ``theta(z+1) = -theta(z)``."""
    return theta_derivs(z, tau, 0)[0]


def theta_char(a, b, z, tau: TauLike):
    """Theta function with rational characteristics.

    ``sum_j e((j+a)^2 tau/2 + (j+a)(z+b))``.

    Args:
        a, b: characteristics (anything :class:`fractions.Fraction` accepts).
        z: argument.
        tau: modular parameter.
    """
    t, tol = _unpack_tau(tau)
    fa, fb = Fraction(a), Fraction(b)
    ka = _window(z, t, tol, float(fa)) + float(fa)
    return asum(e(ka * ka * t * 0.5 + ka * (z + float(fb))))


def theta_product(z, tau: TauLike, tol: float = 1e-17) -> complex:
    """Product form of :func:`theta`.

    ``theta(z) = -2 q^(1/8) sin(pi z) prod_n (1-q^n)(1-q^n e(z))(1-q^n e(-z))``.
    Used as an independent cross-check of the series.
    """
    t, _ = _unpack_tau(tau)
    t = complex(t)
    z = complex(z)
    q = np.exp(TWO_PI_I * t)
    x = np.exp(TWO_PI_I * z)
    val = -2.0 * np.exp(TWO_PI_I * t / 8) * np.sin(np.pi * z)
    n = 1
    while True:
        qn = q**n
        val *= (1 - qn) * (1 - qn * x) * (1 - qn / x)
        if abs(qn) * (1 + abs(x) + 1 / abs(x)) < tol or n > MAX_TERMS:
            break
        n += 1
    return complex(val)


# pole guard ------------------------------------------------------------

def nearest_lattice_point(z, tau: TauLike) -> complex:
    """Closest point of ``Z + tau Z`` to ``z`` (by reduced coordinates)."""
    t, _ = _unpack_tau(tau)
    zb, tb = complex(base(z)), complex(base(t))
    n = round(zb.imag / tb.imag)
    m = round((zb - n * tb).real)
    best = None
    for dm in (-1, 0, 1):
        for dn in (-1, 0, 1):
            w = (m + dm) + (n + dn) * tb
            if best is None or abs(zb - w) < abs(zb - best):
                best = w
    return best


def guard(z, tau: TauLike, eps: float = EPS_POLE, where: str = "") -> None:
    """Raise :class:`PoleError` if ``z`` is within ``eps`` of the lattice."""
    w = nearest_lattice_point(z, tau)
    if abs(complex(base(z)) - w) < eps:
        raise PoleError(f"argument {complex(base(z))} is within {eps} of lattice point {w}"
                        + (f" ({where})" if where else ""),
                        point=complex(base(z)), nearest=w, where=where)


def lattice_distance(z, tau: TauLike) -> float:
    return abs(complex(base(z)) - nearest_lattice_point(z, tau))


# Eisenstein functions ---------------------------------------------------

@lru_cache(maxsize=256)
def _theta0_derivs(tau: complex, tol: float):
    d = theta_derivs(0.0, ModularParam(tau, tol), 3)
    return d[1], d[3]


def _theta_prime0(t, tol):
    if isinstance(t, Bicomplex):
        return theta_derivs(0.0, t, 1)[1]
    return _theta0_derivs(complex(t), tol)[0]


def eisenstein(j: int, z, tau: TauLike, eps: float = EPS_POLE):
    """Eisenstein function ``E_j(z)`` for ``1 <= j <= 4``.

    ``E_1`` is the logarithmic derivative of theta, ``E_2 = -E_1'`` and
    ``E_j = (-1)^j / (j-1)! * E_2^(j-2)`` for ``j > 2``.

    Raises:
        DomainError: for ``j`` outside ``1..4``.
        PoleError: when ``z`` is within ``eps`` of the lattice.
    """
    if j not in (1, 2, 3, 4):
        raise DomainError("eisenstein is implemented for 1 <= j <= 4")
    guard(z, tau, eps, f"E_{j}")
    d = theta_derivs(z, tau, j)
    t1 = d[1] / d[0]
    if j == 1:
        return t1
    t2 = d[2] / d[0]
    if j == 2:
        return t1 * t1 - t2
    t3 = d[3] / d[0]
    if j == 3:
        # E_3 = L'' / 2 with L = log theta'
        return (t3 - 3 * t1 * t2 + 2 * t1 * t1 * t1) * 0.5
    t4 = d[4] / d[0]
    l4 = t4 - 4 * t1 * t3 - 3 * t2 * t2 + 12 * t1 * t1 * t2 - 6 * t1 * t1 * t1 * t1
    return l4 * (-1.0 / 6.0)


def E1(z, tau: TauLike, eps: float = EPS_POLE):
    return eisenstein(1, z, tau, eps)


def E2(z, tau: TauLike, eps: float = EPS_POLE):
    return eisenstein(2, z, tau, eps)


def eta1(tau: TauLike):
    """``eta_1 = -theta'''(0) / (6 theta'(0))``."""
    t, tol = _unpack_tau(tau)
    if isinstance(t, Bicomplex):
        d = theta_derivs(0.0, t, 3)
        return d[3] / (d[1] * -6.0)
    d1, d3 = _theta0_derivs(complex(t), tol)
    return -d3 / (6 * d1)


def weierstrass_zeta(z, tau: TauLike, eps: float = EPS_POLE):
    """``zeta(z) = E_1(z) + 2 eta_1 z``."""
    return E1(z, tau, eps) + 2 * eta1(tau) * z


def weierstrass_p(z, tau: TauLike, eps: float = EPS_POLE):
    """``wp(z) = E_2(z) - 2 eta_1``."""
    return E2(z, tau, eps) - 2 * eta1(tau)


# Kronecker function -------------------------------------------------------

def phi(u, z, tau: TauLike, eps: float = EPS_POLE):
    """``phi(u, z) = theta(u+z) theta'(0) / (theta(u) theta(z))``.

    Raises:
        PoleError: if ``u`` or ``z`` is within ``eps`` of the lattice.
    """
    guard(u, tau, eps, "phi: u")
    guard(z, tau, eps, "phi: z")
    t, tol = _unpack_tau(tau)
    num = theta(u + z, tau) * _theta_prime0(t, tol)
    return num / (theta(u, tau) * theta(z, tau))


def phi_u_derivative(u, z, tau: TauLike, eps: float = EPS_POLE):
    """``f(u, z) = d phi / du = phi(u, z) (E_1(u+z) - E_1(u))``."""
    guard(u, tau, eps, "f: u")
    guard(z, tau, eps, "f: z")
    t, tol = _unpack_tau(tau)
    du = theta_derivs(u, tau, 1)
    duz = theta_derivs(u + z, tau, 1)
    p = duz[0] * _theta_prime0(t, tol) / (du[0] * theta(z, tau))
    return p * (duz[1] / duz[0] - du[1] / du[0])


def _pair(a):
    if hasattr(a, "a1"):
        return int(a.a1), int(a.a2)
    a1, a2 = a
    return int(a1), int(a2)


def omega(a, m: int, tau: TauLike):
    """Lattice point ``(a1 + a2 tau) / m``."""
    t, _ = _unpack_tau(tau)
    a1, a2 = _pair(a)
    return (a1 + a2 * t) * (1.0 / m)


def phi_deformed(a, m: int, eta, z, tau: TauLike, eps: float = EPS_POLE):
    """Deformed Kronecker function ``e_m(a2 z) phi(omega_a + eta, z)``.

    Args:
        a: lattice index (``LatticeIndex`` or integer pair).  Only the
            class mod ``m`` matters.
        m: lattice order.
        eta: shift added to ``omega_a``.
        z: spectral argument.
        tau: modular parameter.
    """
    a1, a2 = _pair(a)
    return e_m(a2 * z, m) * phi(omega((a1, a2), m, tau) + eta, z, tau, eps)


def phi_rev(a, m: int, z, x, tau: TauLike, eps: float = EPS_POLE):
    """``e_m(a2 z) phi(x, z)``: the deformed function with the full first argument given.

    This is the reading in which the summation identities over the
    Heisenberg lattice are written: the argument ``x`` already contains
    the lattice shift, and the integer pair ``a`` is taken unreduced.
    """
    a1, a2 = _pair(a)
    return e_m(a2 * z, m) * phi(x, z, tau, eps)


# degenerations -------------------------------------------------------------

def phi_trig(u, z):
    """Limit of :func:`phi` as ``Im tau -> +infinity``.

    ``pi sin(pi (u+z)) / (sin(pi u) sin(pi z))``.
    """
    return np.pi * np.sin(np.pi * (u + z)) / (np.sin(np.pi * u) * np.sin(np.pi * z))


def phi_deformed_trig(a, m: int, eta, z):
    """Limit of :func:`phi_deformed` as ``Im tau -> +infinity``.

    For ``a2 = 0 (mod m)`` this is ``pi (cot(pi z) + cot(pi (eta + a1/m)))``;
    otherwise ``pi e((a2'/m - 1/2) z) / sin(pi z)`` with ``0 < a2' < m`` the
    reduced representative.
    """
    a1, a2 = _pair(a)
    a2r = a2 % m
    if a2r == 0:
        return np.pi * (1 / np.tan(np.pi * z) + 1 / np.tan(np.pi * (eta + a1 / m)))
    return np.pi * np.exp(TWO_PI_I * (a2r / m - 0.5) * z) / np.sin(np.pi * z)


def phi_rational(u, z):
    """Leading term of :func:`phi_trig` under ``u, z -> eps u, eps z``."""
    return 1 / u + 1 / z


def phi_deformed_rational(a, m: int, eta, z):
    """Leading term of :func:`phi_deformed_trig` under uniform scaling."""
    a1, a2 = _pair(a)
    if a1 % m == 0 and a2 % m == 0:
        return 1 / z + 1 / eta
    return 1 / z
