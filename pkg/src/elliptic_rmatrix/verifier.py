"""Residual engine for the Yang-Baxter-type equations and the symmetries.

Dynamical shifts
----------------
``R_12(u - hbar h3)`` means: on a basis vector whose third factor has
``gl(p)``-weight ``e_s`` (basis index ``(s, alpha)``), evaluate ``R_12``
at ``u - hbar e_s``.  :func:`shifted_action` assembles this block by block.

The canonical equation is

    R12(u, z-w) R13(u + s hbar h2, z) R23(u, w)
        = R23(u + s hbar h1, w) R13(u, z) R12(u + s hbar h3, z-w)

with shift sign ``s`` (``-1`` for every dynamical family here; see
:func:`determine_convention`).  The symmetric form with shifts on every
factor is available as ``form="symmetric"`` for experiments.

All residuals are relative: ``max|LHS - RHS| / max|LHS|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import elliptic as el
from ._aux import Bicomplex, STEP
from .errors import DomainError, PoleError
from .heisenberg import clock_matrix, shift_matrix
from .report import ResidualReport, merge
from .rmatrix import (DEFAULT_HBARS, RMatrixSpec, classical_limit_numeric, raw_build,
                      raw_classical, raw_rational, raw_trig, richardson)

#: pole distance used when drawing random samples
SAMPLE_EPS = 1e-3


@dataclass(frozen=True)
class ShiftConvention:
    """Sign of the dynamical shift and the equation form."""

    sign: int = -1
    form: str = "asymmetric"

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise DomainError("shift sign must be +1 or -1")
        if self.form not in ("asymmetric", "symmetric"):
            raise DomainError("form must be 'asymmetric' or 'symmetric'")

    def as_dict(self) -> dict:
        return {"sign": self.sign, "form": self.form}


CANONICAL = ShiftConvention(-1, "asymmetric")


# embeddings ---------------------------------------------------------------

def embed(R: np.ndarray, legs: tuple[int, int], n: int) -> np.ndarray:
    """Place a two-leg operator on legs ``(1,2)``, ``(1,3)`` or ``(2,3)`` of V^3."""
    R = np.asarray(R)
    eye = np.eye(n)
    if legs == (1, 2):
        return np.kron(R, eye)
    if legs == (2, 3):
        return np.kron(eye, R)
    if legs == (1, 3):
        R4 = R.reshape(n, n, n, n)
        return np.einsum("acbd,ef->aecbfd", R4, eye).reshape(n**3, n**3)
    raise DomainError(f"unsupported legs {legs}")


def weight_projector(s: int, p: int, l: int) -> np.ndarray:
    """Diagonal of the projector onto basis vectors ``(s, alpha)``."""
    d = np.zeros(p * l)
    d[s * l:(s + 1) * l] = 1.0
    return d


def shifted_action(builder: Callable[[list], np.ndarray], legs: tuple[int, int],
                   shift_leg: Optional[int], u: Sequence, hbar, p: int, l: int,
                   sign: int = -1) -> np.ndarray:
    """Two-leg operator on V^3 with ``u`` shifted by ``sign * hbar`` times the
    weight of ``shift_leg``.

    Args:
        builder: ``u -> R(u)`` on V (x) V.
        legs: legs the operator acts on.
        shift_leg: spectator leg (``None`` for no shift).
        u: dynamical vector of length ``p``.
        hbar: shift size.
        p, l: block sizes.
        sign: +1 or -1.

    Raises:
        PoleError: from the builder, with the spectator index attached.
        DomainError: if ``shift_leg`` is one of ``legs``.
    """
    n = p * l
    if shift_leg is None:
        return embed(builder(list(u)), legs, n)
    if shift_leg in legs:
        raise DomainError("the spectator leg must differ from the legs acted on")
    out = np.zeros((n**3, n**3), dtype=complex)
    for s in range(p):
        us = list(u)
        us[s] = us[s] + sign * hbar
        try:
            R = builder(us)
        except PoleError as exc:
            raise PoleError(f"{exc} (spectator weight index {s})", exc.point, exc.nearest,
                            f"{exc.where}; spectator {s}") from None
        diag = [np.ones(n)] * 3
        diag = list(diag)
        diag[shift_leg - 1] = weight_projector(s, p, l)
        proj = np.kron(np.kron(diag[0], diag[1]), diag[2])
        out += embed(R, legs, n) * proj[None, :]
    return out


def _rel(L: np.ndarray, R: np.ndarray) -> tuple[float, float, float]:
    scale = max(np.abs(L).max(), np.abs(R).max())
    d = L - R
    return float(np.abs(d).max() / scale), float(np.linalg.norm(d) / max(np.linalg.norm(L), np.linalg.norm(R))), float(scale)


def qdybe_sides(spec: RMatrixSpec, u, z, w, convention: ShiftConvention = CANONICAL,
                eps: float = el.EPS_POLE):
    """Both sides of the dynamical Yang-Baxter equation on V^3."""
    p, l, h = spec.p, spec.l, spec.hbar
    u = list(u) if u is not None else [0.0] * p
    s = convention.sign

    def A(zz, legs, spectator, sgn):
        b = lambda uu: raw_build(spec, uu, zz, eps=eps)
        if sgn == 0:
            return shifted_action(b, legs, None, u, h, p, l)
        return shifted_action(b, legs, spectator, u, h, p, l, sgn)

    if convention.form == "asymmetric":
        lhs = A(z - w, (1, 2), 3, 0) @ A(z, (1, 3), 2, s) @ A(w, (2, 3), 1, 0)
        rhs = A(w, (2, 3), 1, s) @ A(z, (1, 3), 2, 0) @ A(z - w, (1, 2), 3, s)
    else:
        # symmetric form; sign +1 reproduces the printed signs
        lhs = A(z - w, (1, 2), 3, -s) @ A(z, (1, 3), 2, s) @ A(w, (2, 3), 1, -s)
        rhs = A(w, (2, 3), 1, s) @ A(z, (1, 3), 2, s) @ A(z - w, (1, 2), 3, s)
    return lhs, rhs


def qybe_sides(spec: RMatrixSpec, z, w, eps: float = el.EPS_POLE):
    n = spec.N
    R12 = embed(raw_build(spec, None, z - w, eps=eps), (1, 2), n)
    R13 = embed(raw_build(spec, None, z, eps=eps), (1, 3), n)
    R23 = embed(raw_build(spec, None, w, eps=eps), (2, 3), n)
    return R12 @ R13 @ R23, R23 @ R13 @ R12


def _params(spec: RMatrixSpec, **kw) -> dict:
    d = {"family": spec.family, "p": spec.p, "l": spec.l, "hbar": complex(spec.hbar)}
    if spec.tau is not None:
        d["tau"] = complex(spec.tau.tau)
    if spec.family == "intermediate":
        d["rho"] = spec.rho
    for k, v in kw.items():
        d[k] = v
    return d


def check_qybe(spec: RMatrixSpec, z, w, tol: float = 1e-9, seed=None) -> ResidualReport:
    """Relative residual of the non-dynamical Yang-Baxter equation."""
    if spec.dynamical:
        raise DomainError("check_qybe needs the vertex family")
    L, R = qybe_sides(spec, z, w)
    ma, fr, sc = _rel(L, R)
    return ResidualReport("qybe", ma, tol, frobenius=fr, scale=sc, seed=seed,
                          params=_params(spec, z=complex(z), w=complex(w)))


def check_qdybe(spec: RMatrixSpec, u, z, w, convention: ShiftConvention = CANONICAL,
                tol: float = 1e-9, seed=None) -> ResidualReport:
    """Relative residual of the dynamical Yang-Baxter equation."""
    L, R = qdybe_sides(spec, u, z, w, convention)
    ma, fr, sc = _rel(L, R)
    return ResidualReport("qdybe", ma, tol, frobenius=fr, scale=sc, seed=seed,
                          params=_params(spec, u=[complex(x) for x in u], z=complex(z),
                                         w=complex(w)),
                          extra={"convention": convention.as_dict()})


def unitarity_product(spec: RMatrixSpec, u, z) -> np.ndarray:
    """``R_12(u, z) R_21(u, -z)`` with ``R_21 = P R_12 P``."""
    n = spec.N
    A = raw_build(spec, u, z)
    B = raw_build(spec, u, -z)
    B21 = B.reshape(n, n, n, n).transpose(1, 0, 3, 2).reshape(n * n, n * n)
    return A @ B21


def check_unitarity(spec: RMatrixSpec, u, z, tol: float = 1e-10, seed=None) -> ResidualReport:
    """Off-scalar part of ``R_12(u, z) R_21(u, -z)``.

    The best-fit scalar ``s = tr / dim`` is reported in ``scale``.  The
    residual is ``max|prod - s Id|`` divided by the size of the summed
    products, ``max(|R_12| |R_21|)`` (entrywise absolute values): near
    zeros of ``s`` the product is a cancellation between large terms and
    ``|s|`` itself is not a meaningful scale.
    """
    n = spec.N
    A = raw_build(spec, u, z)
    B = raw_build(spec, u, -z)
    B21 = B.reshape(n, n, n, n).transpose(1, 0, 3, 2).reshape(n * n, n * n)
    M = A @ B21
    dim = M.shape[0]
    s = np.trace(M) / dim
    D = M - s * np.eye(dim)
    term_scale = max(float((np.abs(A) @ np.abs(B21)).max()), abs(s))
    ma = float(np.abs(D).max() / term_scale)
    fr = float(np.linalg.norm(D) / np.linalg.norm(M))
    return ResidualReport("unitarity", ma, tol, frobenius=fr, scale=complex(s), seed=seed,
                          params=_params(spec, u=[complex(x) for x in (u or [])], z=complex(z)),
                          extra={"normalization": "max(|R12| |R21|)", "term_scale": term_scale,
                                 "relative_to_scalar": float(np.abs(D).max() / abs(s))})


def vertex_unitarity_scalar(N: int, z, hbar, tau) -> complex:
    """Closed-form scalar of the vertex unitarity product.

    Termwise ``phi(x, z) phi(-x, z) = E_2(z) - E_2(x)`` plus the lattice sum
    of ``E_2`` give ``c^4 N^2 (E_2(N hbar) - E_2(z))``, ``c = N / 2 pi i``.
    """
    c = N / (2j * np.pi)
    return complex(c**4 * N**2 * (el.E2(N * hbar, tau) - el.E2(z, tau)))


# symmetries ---------------------------------------------------------------

def _on_first(X: np.ndarray, n: int) -> np.ndarray:
    return np.kron(X, np.eye(n))


def symmetry_residuals(spec: RMatrixSpec, u, z, gamma=None, x=None) -> dict:
    """Residuals of the quasi-periodicity, moduli periodicity and weight-zero laws.

    Returns a dict with keys ``z+1``, ``z+tau``, ``u+gamma``, ``u+tau*gamma``
    and ``weight_zero`` (relative max-abs residuals).
    """
    if spec.tau is None:
        raise DomainError("symmetries need an elliptic family")
    p, l, n, h = spec.p, spec.l, spec.N, spec.hbar
    tau = complex(spec.tau.tau)
    u = list(u) if u is not None else [0.0] * p
    R = raw_build(spec, u, z)
    # vertex and felder are the (1,N) and (N,1) intermediate matrices at -z,
    # so their transition laws are read off at z - 1 and z - tau
    s = -1 if spec.family in ("vertex", "felder") else 1
    zi = s * z
    out = {}
    # z -> z+1: conjugation by 1_p (x) Q_l on the first leg
    Ql = np.kron(np.eye(p), clock_matrix(l).entries)
    A = _on_first(Ql, n)
    out["z+1"] = _relerr(raw_build(spec, u, z + s), A @ R @ np.linalg.inv(A))
    # z -> z+tau: conjugation by diag(e(u)) (x) Lambda_l on the first leg and
    # a factor e(hbar) on vectors whose two gl(p)-weights coincide
    Xu = np.kron(np.diag(np.exp(2j * np.pi * np.asarray(u, dtype=complex))), shift_matrix(l).entries)
    A = _on_first(Xu, n)
    wt = np.repeat(np.arange(p), l)
    same = (wt[:, None] == wt[None, :]).reshape(-1)
    M = np.where(same, np.exp(2j * np.pi * h), 1.0)
    out["z+tau"] = _relerr(raw_build(spec, u, z + s * tau), M[:, None] * (A @ R @ np.linalg.inv(A)))
    # moduli lattice
    if gamma is None:
        gamma = list(range(1, p + 1))
    g = np.asarray(gamma, dtype=float)
    out["u+gamma"] = _relerr(raw_build(spec, [ui + gi for ui, gi in zip(u, g)], z), R)
    G = np.kron(np.diag(np.exp(2j * np.pi * l * l * h * g)), np.eye(l))
    Gi = np.linalg.inv(G)
    Ups = np.kron(np.diag(np.exp(2j * np.pi * g * (zi - l * l * h))), np.eye(l))
    lhs = raw_build(spec, [ui + tau * gi for ui, gi in zip(u, g)], z)
    rhs = np.kron(G, Gi) @ _on_first(Ups, n) @ R @ _on_first(np.linalg.inv(Ups), n)
    out["u+tau*gamma"] = _relerr(lhs, rhs)
    # weight zero for block-constant diagonal X
    if x is None:
        x = np.arange(1, p + 1) * (0.7 - 0.3j)
    X = np.kron(np.diag(np.asarray(x, dtype=complex)), np.eye(l))
    XX = np.kron(X, np.eye(n)) + np.kron(np.eye(n), X)
    out["weight_zero"] = float(np.abs(XX @ R - R @ XX).max() / np.abs(R).max())
    return out


def _relerr(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max() / max(np.abs(a).max(), np.abs(b).max()))


def check_symmetries(spec: RMatrixSpec, u, z, tol: float = 1e-10, seed=None) -> ResidualReport:
    """All symmetry residuals bundled; gated on their maximum."""
    res = symmetry_residuals(spec, u, z)
    return ResidualReport("symmetries", max(res.values()), tol, seed=seed,
                          params=_params(spec, u=[complex(x) for x in (u or [])], z=complex(z)),
                          extra={"components": res})


# classical equations ---------------------------------------------------------

def _comm(a, b):
    return a @ b - b @ a


def cybe_residual(r12: np.ndarray, r13: np.ndarray, r23: np.ndarray) -> tuple[float, float]:
    """Relative residual of ``[r12,r13] + [r12,r23] + [r13,r23] = 0``."""
    S = _comm(r12, r13) + _comm(r12, r23) + _comm(r13, r23)
    scale = max(np.abs(_comm(r12, r13)).max(), np.abs(_comm(r12, r23)).max(),
                np.abs(_comm(r13, r23)).max())
    return float(np.abs(S).max() / scale), float(scale)


def _cartan_units(p: int, l: int) -> list[np.ndarray]:
    out = []
    for i in range(p):
        d = np.zeros(p)
        d[i] = 1.0
        out.append(np.kron(np.diag(d), np.eye(l)))
    return out


def modified_cdybe_residual(r_of_u: Callable, u: Sequence, z, w, p: int, l: int,
                            h: float = STEP) -> tuple[float, float]:
    """Relative residual of the classical dynamical Yang-Baxter equation.

    ``[r12,r13] + [r12,r23] + [r13,r23] + D1 r23 - D2 r13 + D3 r12 = 0`` with
    ``D_k = sum_i (E_ii)_k d/du_i``; ``r12 = r(z-w)``, ``r13 = r(z)``, ``r23 = r(w)``.
    Derivatives by complex step in the auxiliary unit.

    Args:
        r_of_u: ``(u, z) -> r`` (must accept Bicomplex ``u`` entries).
    """
    n = p * l
    u = list(u)
    r12 = embed(r_of_u(u, z - w), (1, 2), n)
    r13 = embed(r_of_u(u, z), (1, 3), n)
    r23 = embed(r_of_u(u, w), (2, 3), n)
    S = _comm(r12, r13) + _comm(r12, r23) + _comm(r13, r23)
    scale = max(np.abs(_comm(r12, r13)).max(), np.abs(_comm(r12, r23)).max(),
                np.abs(_comm(r13, r23)).max())
    eye = np.eye(n)
    for i, Ei in enumerate(_cartan_units(p, l)):
        ub = [Bicomplex(x, h) if k == i else x for k, x in enumerate(u)]
        d = {}
        for key, zz in (("12", z - w), ("13", z), ("23", w)):
            val = r_of_u(ub, zz)
            d[key] = (val.b if isinstance(val, Bicomplex) else 0 * np.asarray(val)) / h
        D1 = np.kron(np.kron(Ei, eye), eye)
        D2 = np.kron(np.kron(eye, Ei), eye)
        D3 = np.kron(np.kron(eye, eye), Ei)
        S = S + D1 @ embed(d["23"], (2, 3), n) - D2 @ embed(d["13"], (1, 3), n) \
            + D3 @ embed(d["12"], (1, 2), n)
    return float(np.abs(S).max() / scale), float(scale)


def numeric_classical_r(spec: RMatrixSpec, u, z, **kw):
    """Normalized classical r of ``spec`` by residue + Richardson (may be Bicomplex)."""
    return classical_limit_numeric(spec, u, z, **kw).r


def _as_array(r):
    if isinstance(r, Bicomplex):
        return r
    return np.asarray(r)


def check_classical(spec: RMatrixSpec, u, z, w, tol: float = 1e-8, source: str = "closed",
                    drop_cartan: bool = False, seed=None) -> ResidualReport:
    """Classical Yang-Baxter residual.

    Args:
        spec: vertex family (plain equation) or a dynamical family (with
            the ``D`` terms).
        source: ``"closed"`` for the closed forms (vertex, felder) or
            ``"numeric"`` for the residue + Richardson extraction.
        drop_cartan: felder closed form without its ``E_1(u_ij)`` term.
    """
    N, tau = spec.N, spec.tau

    if source == "closed":
        def r_of_u(uu, zz):
            return raw_classical(spec.family, N, zz, uu, tau, drop_cartan)
    elif source == "numeric":
        def r_of_u(uu, zz):
            return _as_array(numeric_classical_r(spec, uu, zz))
    else:
        raise DomainError("source must be 'closed' or 'numeric'")

    if spec.family == "vertex":
        n = N
        res, sc = cybe_residual(embed(r_of_u(None, z - w), (1, 2), n),
                                embed(r_of_u(None, z), (1, 3), n),
                                embed(r_of_u(None, w), (2, 3), n))
        name = "cybe"
    else:
        res, sc = modified_cdybe_residual(r_of_u, u, z, w, spec.p, spec.l)
        name = "modified_cdybe"
    return ResidualReport(name, res, tol, scale=sc, seed=seed,
                          params=_params(spec, u=[complex(x) for x in (u or [])], z=complex(z),
                                         w=complex(w), source=source, drop_cartan=drop_cartan))


# degenerations and limits ------------------------------------------------------

def check_classical_match(spec: RMatrixSpec, u, z, tol: float = 1e-6,
                          hbar_samples: Sequence[float] = DEFAULT_HBARS, seed=None) -> ResidualReport:
    """Numerically extracted classical r against the closed form (vertex, felder).

    The residual is ``max|r_num - r_closed| / max(1, max|r_closed|)``; the
    measured leading coefficient is reported in ``scale``.
    """
    if spec.family not in ("vertex", "felder"):
        raise DomainError("closed-form classical r-matrices exist for vertex and felder only")
    uu = None if spec.family == "vertex" else list(u)
    num = classical_limit_numeric(spec, uu, z, hbar_samples)
    ref = raw_classical(spec.family, spec.N, z, uu, spec.tau)
    diff = np.abs(np.asarray(num.r) - ref)
    res = float(diff.max() / max(1.0, np.abs(ref).max()))
    return ResidualReport("classical_match", res, tol, frobenius=float(np.linalg.norm(diff)),
                          scale=complex(num.normalization), seed=seed,
                          params=_params(spec, u=[complex(x) for x in (uu or [])], z=complex(z),
                                         hbar_samples=list(hbar_samples)),
                          extra={"richardson_error": num.error_estimate})


def check_trig_limit(p: int, l: int, u, z, hbar, im_tau: float = 15.0, re_tau: float = 0.0,
                     tol: float = 1e-8, seed=None) -> ResidualReport:
    """Elliptic intermediate R at large ``Im tau`` against the trigonometric R.

    Residual ``max|R_ell - R_trig| / max(1, max|R_trig|)``.
    """
    tau = el.ModularParam(complex(re_tau, im_tau))
    A = raw_build(RMatrixSpec("intermediate", p, l, tau, hbar), u, z)
    B = raw_trig(p, l, u, z, hbar)
    diff = np.abs(A - B)
    res = float(diff.max() / max(1.0, np.abs(B).max()))
    return ResidualReport("trig_limit", res, tol, frobenius=float(np.linalg.norm(diff)), seed=seed,
                          params={"p": p, "l": l, "tau": complex(tau.tau), "hbar": complex(hbar),
                                  "u": [complex(x) for x in u], "z": complex(z)})


RATIONAL_SCALES = (1e-2, 5e-3, 2.5e-3)


def check_rational_limit(p: int, l: int, u, z, hbar, tol: float = 1e-6,
                         scales: Sequence[float] = RATIONAL_SCALES, seed=None) -> ResidualReport:
    """``eps R_trig(eps u, eps z, eps hbar) -> R_rational(u, z, hbar)`` as ``eps -> 0``.

    The samples at ``+eps`` and ``-eps`` are averaged (odd orders cancel)
    and extrapolated in ``eps**2``.
    """
    def G(e):
        return raw_trig(p, l, [e * x for x in u], e * z, e * hbar) * e

    vals = [(G(e) + G(-e)) * 0.5 for e in scales]
    est, err = richardson(vals, [e * e for e in scales])
    ref = raw_rational(p, l, u, z, hbar)
    diff = np.abs(est - ref)
    res = float(diff.max() / max(1.0, np.abs(ref).max()))
    return ResidualReport("rational_limit", res, tol, frobenius=float(np.linalg.norm(diff)), seed=seed,
                          params={"p": p, "l": l, "hbar": complex(hbar), "u": [complex(x) for x in u],
                                  "z": complex(z), "scales": list(scales)},
                          extra={"richardson_error": err})


def check_degeneration(kind: str, N: int, u, z, hbar, tau, tol: float = 1e-12,
                       seed=None) -> ResidualReport:
    """Intermediate R at ``(1, N)`` / ``(N, 1)`` against vertex / felder after the convention map."""
    from .rmatrix import felder_from_intermediate, vertex_from_intermediate

    tau = tau if isinstance(tau, el.ModularParam) else el.ModularParam(tau)
    if kind == "vertex":
        A = vertex_from_intermediate(raw_build(RMatrixSpec("intermediate", 1, N, tau, hbar), [0.0], -z))
        B = raw_build(RMatrixSpec("vertex", 1, N, tau, hbar), None, z)
    elif kind == "felder":
        A = felder_from_intermediate(raw_build(RMatrixSpec("intermediate", N, 1, tau, hbar), u, -z))
        B = raw_build(RMatrixSpec("felder", N, 1, tau, hbar), u, z)
    else:
        raise DomainError("kind must be 'vertex' or 'felder'")
    diff = np.abs(A - B)
    res = float(diff.max() / max(1.0, np.abs(B).max()))
    return ResidualReport(f"degeneration_{kind}", res, tol, frobenius=float(np.linalg.norm(diff)),
                          seed=seed, params={"N": N, "tau": complex(tau.tau), "hbar": complex(hbar),
                                             "z": complex(z), "u": [complex(x) for x in (u or [])]})


# sampling sweeps ---------------------------------------------------------------

def random_tau(rng: np.random.Generator, im_range=(0.5, 2.0)) -> complex:
    return complex(rng.uniform(-0.5, 0.5), rng.uniform(*im_range))


def random_point(rng: np.random.Generator, tau: complex, scale: float = 1.0) -> complex:
    """Uniform point of the parallelogram ``[-1/2, 1/2)(1, tau)`` times ``scale``."""
    s, t = rng.uniform(-0.5, 0.5, size=2)
    return complex((s + t * tau) * scale)


def draw_sample(rng: np.random.Generator, family: str, p: int, l: int, tau_range=(0.5, 2.0),
                rho: str = "scaled", max_tries: int = 200):
    """Random ``(spec, u, z, w)`` with every R-matrix argument off the poles.

    Rejection uses a pole distance of ``SAMPLE_EPS`` on every term of the
    R-matrices that the dynamical equation evaluates.
    """
    for _ in range(max_tries):
        tau = random_tau(rng, tau_range)
        hbar = random_point(rng, tau, 0.5)
        u = [random_point(rng, tau) for _ in range(p)]
        z = random_point(rng, tau)
        w = random_point(rng, tau)
        kw = dict(family=family, p=p, l=l, hbar=hbar, rho=rho)
        if family in ("vertex", "felder", "intermediate"):
            kw["tau"] = el.ModularParam(tau)
        spec = RMatrixSpec(**kw)
        try:
            _probe(spec, u, z, w)
        except PoleError:
            continue
        return spec, u, z, w
    raise RuntimeError("could not draw a sample away from the poles")


def _probe(spec: RMatrixSpec, u, z, w) -> None:
    us = [list(u)]
    for s in range(spec.p):
        for sg in (-1, 1):
            v = list(u)
            v[s] = v[s] + sg * spec.hbar
            us.append(v)
    for zz in (z, w, z - w, -z, -w, w - z):
        for v in us:
            if spec.family in ("trig", "rational"):
                _trig_guard(spec, v, zz)
            else:
                raw_build(spec, v if spec.dynamical else None, zz, eps=SAMPLE_EPS)


def _trig_guard(spec: RMatrixSpec, u, z) -> None:
    # poles of cot / sin / 1/x live on the real integers (rational: at 0)
    pts = [z, spec.l * spec.hbar]
    for i in range(spec.p):
        for j in range(spec.p):
            x = u[i] - u[j] + (spec.hbar if i == j else 0.0)
            pts.append(spec.l * (u[i] - u[j]) if i != j else spec.hbar)
            for a1 in range(spec.l):
                pts.append(-x - a1 / spec.l)
    for x in pts:
        x = complex(x)
        d = abs(x - round(x.real)) if spec.family == "trig" else abs(x)
        if d < SAMPLE_EPS:
            raise PoleError("sample too close to a trigonometric pole", point=x)


def sweep(check: str, family: str, p: int, l: int, n_samples: int = 20, seed: int = 0,
          tol: float = 1e-9, convention: ShiftConvention = CANONICAL,
          rho: str = "scaled", **kw) -> ResidualReport:
    """Run ``check`` on ``n_samples`` random parameter tuples and merge by max.

    ``check`` is one of ``qybe, qdybe, unitarity, symmetries, classical``.
    """
    rng = np.random.default_rng(seed)
    reps = []
    for k in range(n_samples):
        spec, u, z, w = draw_sample(rng, family, p, l, rho=rho)
        if check == "qybe":
            reps.append(check_qybe(spec, z, w, tol))
        elif check == "qdybe":
            reps.append(check_qdybe(spec, u, z, w, convention, tol))
        elif check == "unitarity":
            reps.append(check_unitarity(spec, u if spec.dynamical else None, z, tol))
        elif check == "symmetries":
            reps.append(check_symmetries(spec, u if spec.dynamical else None, z, tol))
        elif check == "classical":
            reps.append(check_classical(spec, u if spec.dynamical else None, z, w, tol, **kw))
        else:
            raise DomainError(f"unknown check {check!r}")
    extra = {"family": family, "p": p, "l": l}
    if check == "qdybe":
        extra["convention"] = convention.as_dict()
    return merge(f"{check}[{family} p={p} l={l}]", reps, tol, seed=seed, extra=extra)


def determine_convention(family: str, p: int, l: int, n_samples: int = 5, seed: int = 0,
                         tol: float = 1e-9, rho: str = "scaled") -> ShiftConvention:
    """The unique shift sign of the asymmetric form under which ``family`` passes.

    Raises:
        RuntimeError: if no sign, or more than one, passes on all samples.
    """
    ok = []
    for sign in (-1, 1):
        conv = ShiftConvention(sign, "asymmetric")
        rep = sweep("qdybe", family, p, l, n_samples, seed, tol, conv, rho)
        if rep.passed:
            ok.append(conv)
    if len(ok) != 1:
        raise RuntimeError(f"expected exactly one passing shift sign for {family}, got {ok}")
    return ok[0]
