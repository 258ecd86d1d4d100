"""Randomised residual checks of the elliptic function identities.

Each identity is a function ``(rng, tau, eps) -> list[complex]`` returning
the terms of an expression that should vanish.  The residual of a tuple is
``|sum(terms)| / max(1, sum |terms|)``: the identities involve
cancellation between large terms near poles, and this is the scale
against which double precision can be judged.

Sample points are drawn uniformly from the fundamental rectangle
``{x + y tau : -1/2 <= x, y < 1/2}``.  Every function is evaluated with a
pole guard of :data:`SAMPLE_EPS`; a tuple that trips it is redrawn.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import elliptic as el
from ._aux import STEP, Bicomplex
from .errors import PoleError
from .report import ResidualReport

#: distance to the nearest pole below which a sample is redrawn
SAMPLE_EPS = 1e-3

#: default range of Im tau when tau is sampled
TAU_IM_RANGE = (0.5, 2.0)

MAX_RETRIES = 50


def _point(rng: np.random.Generator, tau: complex) -> complex:
    x, y = rng.uniform(-0.5, 0.5, size=2)
    return complex(x + y * tau)


def _points(rng, tau, k: int) -> list[complex]:
    return [_point(rng, tau) for _ in range(k)]


# identities ------------------------------------------------------------------

def fay(rng, tau, eps):
    """Three-term Fay relation for the Kronecker function."""
    u1, u2, z1, z2 = _points(rng, tau, 4)
    ph = lambda a, b: el.phi(a, b, tau, eps)
    return [ph(u1, z1) * ph(u2, z2),
            -ph(u1 + u2, z1) * ph(u2, z2 - z1),
            -ph(u1 + u2, z2) * ph(u1, z1 - z2)]


def calogero(rng, tau, eps):
    """``phi(u) f(v) - phi(v) f(u) = (E2(u) - E2(v)) phi(u+v)`` at fixed z."""
    u, v, z = _points(rng, tau, 3)
    f = lambda a: el.phi_u_derivative(a, z, tau, eps)
    ph = lambda a: el.phi(a, z, tau, eps)
    return [ph(u) * f(v), -ph(v) * f(u),
            -(el.E2(u, tau, eps) - el.E2(v, tau, eps)) * ph(u + v)]


def phi_product(rng, tau, eps):
    """``phi(u, z) phi(-u, z) = E2(z) - E2(u)``."""
    u, z = _points(rng, tau, 2)
    return [el.phi(u, z, tau, eps) * el.phi(-u, z, tau, eps),
            -el.E2(z, tau, eps), el.E2(u, tau, eps)]


def _cubic_f(u1, u2, v, tau, eps):
    E = lambda x: el.E1(x, tau, eps)
    return E(v) - E(u1 - u2 - v) + E(u1 - v) - E(u2 + v)


def _cubic_lhs(u1, u2, v, z, w, tau, eps):
    ph = lambda a, b: el.phi(a, b, tau, eps)
    return [ph(v, z - w) * ph(u1 - v, z) * ph(u2 + v, w),
            -ph(u1 - u2 - v, z - w) * ph(u2 + v, z) * ph(u1 - v, w)]


def _cubic_rhs(u1, u2, v, z, w, tau, eps):
    return el.phi(u1, z, tau, eps) * el.phi(u2, w, tau, eps) * _cubic_f(u1, u2, v, tau, eps)


def cubic(rng, tau, eps):
    """Cubic relation with the four-term ``E1`` combination on the right."""
    u1, u2, v, z, w = _points(rng, tau, 5)
    return _cubic_lhs(u1, u2, v, z, w, tau, eps) + [-_cubic_rhs(u1, u2, v, z, w, tau, eps)]


def _cubic_degenerate_rhs(u1, v, z, tau, eps):
    return el.phi(u1, z, tau, eps) * (el.E2(v, tau, eps) - el.E2(u1 - v, tau, eps))


def cubic_degenerate(rng, tau, eps):
    """The ``u2 = 0`` member of :func:`cubic`, with ``E2`` on the right."""
    u1, v, z, w = _points(rng, tau, 4)
    return _cubic_lhs(u1, 0.0, v, z, w, tau, eps) + [-_cubic_degenerate_rhs(u1, v, z, tau, eps)]


#: circle used to take the removable limit ``u2 -> 0`` of the right side of :func:`cubic`
LIMIT_RADIUS = 1e-2
LIMIT_POINTS = 32


def cubic_limit(rng, tau, eps):
    """Right side of :func:`cubic` continued to ``u2 = 0`` against :func:`cubic_degenerate`.

    ``phi(u2, w)`` has a simple pole at ``u2 = 0`` cancelled by a zero of
    the ``E1`` combination; the value at the removable point is the mean
    over a small circle (trapezoid rule, exact up to ``r**LIMIT_POINTS``).
    """
    u1, v, z, w = _points(rng, tau, 4)
    # keep every other singularity well outside the circle
    for x in (u1, v, u1 - v, z, w):
        el.guard(x, tau, max(eps, 3 * LIMIT_RADIUS))
    nodes = LIMIT_RADIUS * np.exp(2j * np.pi * (np.arange(LIMIT_POINTS) + 0.5) / LIMIT_POINTS)
    lim = sum(_cubic_rhs(u1, s, v, z, w, tau, eps) for s in nodes) / LIMIT_POINTS
    return [lim, -_cubic_degenerate_rhs(u1, v, z, tau, eps)]


def heat(rng, tau, eps, h: float = STEP):
    """``d_tau phi(u, w) = (1 / 2 pi i) d_u d_w phi(u, w)``.

    The tau derivative is one complex step; the mixed derivative uses two
    nested auxiliary units so it is exact to rounding as well.
    """
    u, w = _points(rng, tau, 2)
    dtau = el.phi(u, w, el.Bicomplex(tau, h), eps).b / h
    uu = Bicomplex(Bicomplex(u, h), Bicomplex(0.0, 0.0))
    ww = Bicomplex(Bicomplex(w, 0.0), Bicomplex(h, 0.0))
    duw = el.phi(uu, ww, tau, eps).b.b / (h * h)
    return [dtau, -duw / el.TWO_PI_I]


def lattice_sum(m: int) -> Callable:
    """``sum_{a in Gamma_m} E2(z + omega_a) = m**2 E2(m z)``."""

    def check(rng, tau, eps):
        z = _point(rng, tau)
        terms = [el.E2(z + el.omega((a1, a2), m, tau), tau, eps)
                 for a1 in range(m) for a2 in range(m)]
        return terms + [-(m * m) * el.E2(m * z, tau, eps)]

    check.__name__ = f"lattice_sum_m{m}"
    return check


def _psi(a, m, z, x, tau, eps):
    return el.phi_rev(a, m, z, x, tau, eps)


def _lattice_args(rng, m):
    return [tuple(int(t) for t in rng.integers(0, m, 2)) for _ in range(3)]


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _neg(a):
    return (-a[0], -a[1])


SUM_ORDERS = (2, 3, 4)


def deformed_two_term(rng, tau, eps):
    """Two-term summation relation for the deformed functions on ``Gamma_m``."""
    m = int(rng.choice(SUM_ORDERS))
    a, b, _ = _lattice_args(rng, m)
    z, w, u, v = _points(rng, tau, 4)
    wa, wb = el.omega(a, m, tau), el.omega(b, m, tau)
    ps = lambda c, zz, x: _psi(c, m, zz, x, tau, eps)
    return [ps(_add(a, b), z - w, u + wa + wb) * ps(_neg(b), z, v - wb),
            ps(a, z, u + v + wa) * ps(_neg(_add(a, b)), w, -u - wa - wb),
            -ps(a, z - w, u + v + wa) * ps(_neg(b), w, v - wb)]


def _three_term_lhs(a, b, c, m, z, w, u, v, tau, eps):
    wa, wb, wc = (el.omega(x, m, tau) for x in (a, b, c))
    ps = lambda d, zz, x: _psi(d, m, zz, x, tau, eps)
    bc = _add(b, c)
    return [ps(_add(_add(a, b), c), z - w, u + wa + wb + wc) * ps(_neg(bc), z, v - wb - wc)
            * ps(c, w, u + wc),
            -ps(_add(a, _neg(c)), z - w, v + wa - wc) * ps(c, z, u + wc)
            * ps(_neg(bc), w, v - wb - wc)]


def deformed_three_term(rng, tau, eps):
    """Three-factor summation relation, branch ``a + b != 0 (mod m)``."""
    m = int(rng.choice(SUM_ORDERS))
    while True:
        a, b, c = _lattice_args(rng, m)
        if (a[0] + b[0]) % m or (a[1] + b[1]) % m:
            break
    z, w, u, v = _points(rng, tau, 4)
    wa, wb, wc = (el.omega(x, m, tau) for x in (a, b, c))
    E = lambda x: el.E1(x, tau, eps)
    rhs = (_psi(a, m, z, wa + u + v, tau, eps) * _psi(_neg(_add(a, b)), m, w, -wa - wb, tau, eps)
           * (E(u + wa + wb + wc) - E(v + wa - wc) + E(v - wb - wc) - E(u + wc)))
    return _three_term_lhs(a, b, c, m, z, w, u, v, tau, eps) + [-rhs]


def deformed_three_term_degenerate(rng, tau, eps):
    """Three-factor summation relation, branch ``a + b = 0 (mod m)``."""
    m = int(rng.choice(SUM_ORDERS))
    a, _, c = _lattice_args(rng, m)
    b = ((-a[0]) % m, (-a[1]) % m)
    z, w, u, v = _points(rng, tau, 4)
    wa, wc = el.omega(a, m, tau), el.omega(c, m, tau)
    E2 = lambda x: el.E2(x, tau, eps)
    rhs = _psi(a, m, z, wa + u + v, tau, eps) * (E2(u + wc) - E2(v + wa - wc))
    return _three_term_lhs(a, b, c, m, z, w, u, v, tau, eps) + [-rhs]


#: name -> identity, in report order
IDENTITIES: dict[str, Callable] = {
    "fay": fay,
    "calogero": calogero,
    "phi_product": phi_product,
    "cubic": cubic,
    "cubic_degenerate": cubic_degenerate,
    "cubic_limit": cubic_limit,
    "heat": heat,
    "lattice_sum_m2": lattice_sum(2),
    "lattice_sum_m3": lattice_sum(3),
    "lattice_sum_m4": lattice_sum(4),
    "deformed_two_term": deformed_two_term,
    "deformed_three_term": deformed_three_term,
    "deformed_three_term_degenerate": deformed_three_term_degenerate,
}


def residual(terms: list) -> float:
    """``|sum| / max(1, sum |term|)`` for one sampled tuple."""
    total = sum(terms)
    scale = max(1.0, sum(abs(t) for t in terms))
    return float(abs(total) / scale)


def _draw_tau(rng, im_range) -> complex:
    return complex(rng.uniform(-0.5, 0.5), rng.uniform(*im_range))


def run_identity(name: str, n_samples: int = 100, tol: float = 1e-10, seed: int = 0,
                 tau=None, tau_im_range=TAU_IM_RANGE, eps: float = SAMPLE_EPS) -> ResidualReport:
    """Check one identity on ``n_samples`` random tuples.

    Args:
        name: key of :data:`IDENTITIES`.
        n_samples: number of accepted tuples.
        tol: pass threshold on the worst residual.
        seed: seed of the ``numpy`` generator (recorded in the report).
        tau: fixed modular parameter; when ``None`` a fresh tau with
            ``Im tau`` in ``tau_im_range`` is drawn for every tuple.
        tau_im_range: range of ``Im tau`` for sampled tau.
        eps: pole-proximity threshold for redrawing a tuple.

    Returns:
        A report with the maximal residual; failures are recorded, not raised.
    """
    fn = IDENTITIES[name]
    rng = np.random.default_rng(seed)
    worst, worst_tau, n_ok, n_skip = 0.0, None, 0, 0
    fixed = None if tau is None else complex(tau.tau if isinstance(tau, el.ModularParam) else tau)
    while n_ok < n_samples:
        for _ in range(MAX_RETRIES):
            t = fixed if fixed is not None else _draw_tau(rng, tau_im_range)
            try:
                terms = fn(rng, t, eps)
                break
            except PoleError:
                n_skip += 1
        else:
            break
        r = residual(terms)
        if not np.isfinite(r):
            r = float("inf")
        if r >= worst:
            worst, worst_tau = r, t
        n_ok += 1
    return ResidualReport(
        name, worst, tol, seed=seed, n_samples=n_ok, n_skipped=n_skip,
        params={"tau": fixed if fixed is not None else "sampled",
                "tau_im_range": list(tau_im_range)},
        extra={"normalization": "abs(sum) / max(1, sum abs(term))",
               "worst_tau": worst_tau, "sample_eps": eps})


def identity_suite(tau=None, n_samples: int = 100, tol: float = 1e-10, seed: int = 0,
                   names=None, tau_im_range=TAU_IM_RANGE) -> list[ResidualReport]:
    """Run every identity of :data:`IDENTITIES` (or the selected ``names``).

    Each identity gets its own generator seeded from ``seed`` and its
    position, so subsets reproduce the same tuples as the full run.
    """
    keys = list(IDENTITIES) if names is None else list(names)
    order = list(IDENTITIES)
    return [run_identity(k, n_samples, tol, seed + 1000 * order.index(k), tau, tau_im_range)
            for k in keys]
