"""Interaction-round-the-face models built from dynamical R-matrices.

Heights live in the dual of the dynamical Cartan: vectors of length ``p``
with exact :class:`~fractions.Fraction` entries.  Adjacent heights differ
by one of the ``p`` weights ``mu_s = e_s - (1, ..., 1) / p`` of the vector
representation, and the weight space ``V[mu_s]`` is spanned by the basis
vectors ``(s, alpha)``; it has dimension ``l``.

A face is labelled by its corners clockwise from the top left::

    a --- b
    |     |
    d --- c

and is admissible when ``b - a``, ``c - b``, ``d - a`` and ``c - d`` are
weights.  Its Boltzmann weight is the block of ``R`` between the two
paths from ``a`` to ``c``,

    W(a, b, c, d; z) = <e_{c-b} (x) e_{b-a}| R(u0 + hbar (a + c) / 2, z) |e_{d-a} (x) e_{c-d}>,

a number for ``l = 1`` and an ``(l, l, l, l)`` array otherwise, indexed
``[out_1, out_2, in_1, in_2]`` with the steps of each path in order
(``out_1`` on ``b - a``, ``in_1`` on ``d - a``).

With ``Rc = P R`` acting on paths, the braid relation
``Rc12(z-w) Rc23(z) Rc12(w) = Rc23(w) Rc12(z) Rc23(z-w)`` becomes the
star-triangle relation checked by :func:`check_star_triangle`.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import elliptic as el
from .errors import AdmissibilityError, DomainError, PoleError, ResourceGuardError
from .report import ResidualReport
from .rmatrix import RMatrixSpec, raw_build

Height = tuple  # of Fraction

#: families whose R-matrix depends on a dynamical variable
DYNAMICAL_FAMILIES = ("felder", "intermediate", "trig", "rational")

#: largest number of height configurations enumerated by :func:`partition_function`
MAX_CONFIGS = 200_000


def weight_vectors(p: int) -> list[Height]:
    """The ``p`` weights ``mu_s = e_s - (1,...,1)/p`` as exact vectors."""
    if p < 1:
        raise DomainError("p must be >= 1")
    return [tuple(Fraction(int(k == s)) - Fraction(1, p) for k in range(p)) for s in range(p)]


def height(values: Sequence) -> Height:
    """Convert a sequence of rationals (ints, Fractions, strings) to a height."""
    return tuple(Fraction(v) for v in values)


def _sub(x: Height, y: Height) -> Height:
    return tuple(a - b for a, b in zip(x, y))


def _add(x: Height, y: Height) -> Height:
    return tuple(a + b for a, b in zip(x, y))


def weight_index(diff: Height, p: int) -> Optional[int]:
    """``s`` with ``diff == mu_s``, or ``None`` if ``diff`` is not a weight."""
    if len(diff) != p:
        return None
    shifted = [d + Fraction(1, p) for d in diff]
    if sorted(shifted) != [0] * (p - 1) + [1]:
        return None
    return shifted.index(1)


def neighbours(a: Height) -> list[Height]:
    """The ``p`` heights reachable from ``a`` in one step."""
    return [_add(a, m) for m in weight_vectors(len(a))]


def admissible(a: Height, b: Height, c: Height, d: Height) -> bool:
    """All four edges of the face are weights."""
    p = len(a)
    return all(weight_index(_sub(y, x), p) is not None
               for x, y in ((a, b), (b, c), (a, d), (d, c)))


def _check_model(spec: RMatrixSpec) -> None:
    if spec.family not in DYNAMICAL_FAMILIES:
        raise DomainError(f"IRF weights need a dynamical family, got {spec.family!r}")
    if spec.p < 2:
        raise DomainError("IRF weights need p >= 2")


class FaceWeights:
    """Cached face weights of one R-matrix at a fixed baseline ``u0``.

    Args:
        spec: parameters of a dynamical R-matrix.
        u_base: baseline dynamical vector ``u0`` (zeros by default).
        eps: pole guard for the R-matrix evaluation.
    """

    def __init__(self, spec: RMatrixSpec, u_base=None, eps: float = el.EPS_POLE):
        _check_model(spec)
        self.spec = spec
        self.p, self.l = spec.p, spec.l
        self.u_base = np.zeros(self.p, complex) if u_base is None else np.asarray(u_base, complex)
        if self.u_base.shape != (self.p,):
            raise DomainError(f"u_base must have length p={self.p}")
        self.eps = eps
        self._cache: dict = {}

    def dynamical_argument(self, a: Height, c: Height) -> np.ndarray:
        """``u0 + hbar (a + c) / 2``."""
        mid = np.array([float(x + y) / 2 for x, y in zip(a, c)])
        return self.u_base + self.spec.hbar * mid

    def _R(self, a: Height, c: Height, z) -> np.ndarray:
        key = (tuple(x + y for x, y in zip(a, c)), complex(z))
        R = self._cache.get(key)
        if R is None:
            R = raw_build(self.spec, list(self.dynamical_argument(a, c)), z, eps=self.eps)
            self._cache[key] = R
        return R

    def __call__(self, a: Height, b: Height, c: Height, d: Height, z):
        p, l, n = self.p, self.l, self.p * self.l
        s_ba, s_cb = weight_index(_sub(b, a), p), weight_index(_sub(c, b), p)
        s_da, s_cd = weight_index(_sub(d, a), p), weight_index(_sub(c, d), p)
        if None in (s_ba, s_cb, s_da, s_cd):
            raise AdmissibilityError(f"face ({a}, {b}, {c}, {d}) is not admissible")
        R = self._R(a, c, z).reshape(n, n, n, n)
        blk = R[s_cb * l:(s_cb + 1) * l, s_ba * l:(s_ba + 1) * l,
                s_da * l:(s_da + 1) * l, s_cd * l:(s_cd + 1) * l]
        # rows of R are (c-b) (x) (b-a); reorder to path order
        blk = blk.transpose(1, 0, 2, 3)
        if l == 1:
            return complex(blk[0, 0, 0, 0])
        return blk.copy()


def boltzmann_weight(a, b, c, d, z, spec: RMatrixSpec, u_base=None):
    """Face weight ``W(a, b, c, d; z)``; see the module docstring.

    Raises:
        AdmissibilityError: if the face is not admissible.
        PoleError: if the R-matrix is evaluated at a pole.
    """
    return FaceWeights(spec, u_base)(height(a), height(b), height(c), height(d), z)


# star-triangle ----------------------------------------------------------------

def _as_block(x, l: int) -> np.ndarray:
    return np.asarray(x, complex).reshape(l, l, l, l)


def star_triangle_sides(W: FaceWeights, a, b, c, d, e, f, z12, z13, z23):
    """Both sides of the star-triangle relation as ``(l,)*6`` arrays.

    The outer boundary is the path ``a -> b -> c -> d`` (out) and the path
    ``a -> f -> e -> d`` (in); ``g`` runs over the heights for which all
    three faces of a side are admissible.

    Returns:
        ``(lhs, rhs, n_lhs, n_rhs)`` with the number of admissible ``g``.
    """
    l = W.l
    lhs = np.zeros((l,) * 6, complex)
    rhs = np.zeros((l,) * 6, complex)
    n_l = n_r = 0
    for g in neighbours(a):
        if admissible(a, b, c, g) and admissible(g, c, d, e) and admissible(a, g, e, f):
            A = _as_block(W(a, b, c, g, z12), l)
            B = _as_block(W(g, c, d, e, z13), l)
            C = _as_block(W(a, g, e, f, z23), l)
            lhs += np.einsum("ABxy,yCzK,xzIJ->ABCIJK", A, B, C)
            n_l += 1
    for g in neighbours(b):
        if admissible(b, c, d, g) and admissible(a, b, g, f) and admissible(f, g, d, e):
            F = _as_block(W(b, c, d, g, z23), l)
            E = _as_block(W(a, b, g, f, z13), l)
            D = _as_block(W(f, g, d, e, z12), l)
            rhs += np.einsum("BCxy,AxIz,zyJK->ABCIJK", F, E, D)
            n_r += 1
    return lhs, rhs, n_l, n_r


def check_star_triangle(a, b, c, d, e, f, z12, z13=None, z23=None, spec: RMatrixSpec = None,
                        tol: float = 1e-9, u_base=None, seed=None) -> ResidualReport:
    """Residual of the star-triangle relation for one boundary.

    Args:
        a, b, c, d, e, f: heights of the hexagon; ``a->b->c->d`` and
            ``a->f->e->d`` must be paths of weights.
        z12, z13, z23: spectral differences with ``z13 = z12 + z23``
            (``z13`` defaults to that sum).
        spec: parameters of a dynamical R-matrix.
        tol: pass threshold on the relative max-abs residual.
        u_base: baseline dynamical vector.

    Returns:
        Report with ``extra["vacuous"] = True`` when no ``g`` is admissible
        on either side; such a report never passes.
    """
    if spec is None or z23 is None:
        raise DomainError("spec and z23 are required")
    if z13 is None:
        z13 = z12 + z23
    if abs(z13 - z12 - z23) > 1e-12 * max(1.0, abs(z13)):
        raise DomainError("star-triangle relation needs z13 = z12 + z23")
    hs = [height(x) for x in (a, b, c, d, e, f)]
    a, b, c, d, e, f = hs
    p = len(a)
    for x, y in ((a, b), (b, c), (c, d), (a, f), (f, e), (e, d)):
        if weight_index(_sub(y, x), p) is None:
            raise AdmissibilityError(f"boundary edge {x} -> {y} is not a weight")
    W = FaceWeights(spec, u_base)
    lhs, rhs, n_l, n_r = star_triangle_sides(W, a, b, c, d, e, f, z12, z13, z23)
    vacuous = n_l == 0 and n_r == 0
    scale = max(np.abs(lhs).max(), np.abs(rhs).max())
    diff = np.abs(lhs - rhs)
    res = 0.0 if vacuous or scale == 0 else float(diff.max() / scale)
    return ResidualReport(
        "star_triangle", res, tol, frobenius=float(np.linalg.norm(lhs - rhs)),
        scale=float(scale), seed=seed,
        params={"family": spec.family, "p": spec.p, "l": spec.l,
                "heights": [[str(x) for x in h] for h in hs],
                "z12": complex(z12), "z23": complex(z23), "hbar": complex(spec.hbar),
                "tau": complex(spec.tau.tau) if spec.tau is not None else None},
        extra={"vacuous": vacuous, "n_g_lhs": n_l, "n_g_rhs": n_r})


def random_height(rng: np.random.Generator, p: int, den: int = 97) -> Height:
    """Generic rational height, so that ``u0 + hbar (a + c) / 2`` avoids poles."""
    return tuple(Fraction(int(k), den) for k in rng.integers(-3 * den, 3 * den, p))


def random_hexagon(rng: np.random.Generator, p: int) -> tuple:
    """Random ``(a, b, c, d, e, f)`` whose two boundary paths share their steps."""
    mu = weight_vectors(p)
    a = random_height(rng, p)
    steps = [int(s) for s in rng.integers(0, p, 3)]
    other = [steps[i] for i in rng.permutation(3)]
    b = _add(a, mu[steps[0]])
    c = _add(b, mu[steps[1]])
    d = _add(c, mu[steps[2]])
    f = _add(a, mu[other[0]])
    e = _add(f, mu[other[1]])
    return a, b, c, d, e, f


def star_triangle_sweep(family: str, p: int, l: int, n_samples: int = 50, seed: int = 0,
                        tol: float = 1e-9, max_tries: int = 200) -> ResidualReport:
    """Star-triangle residual over random heights, spectral points, ``hbar`` and ``tau``."""
    from .verifier import random_point, random_tau

    rng = np.random.default_rng(seed)
    reps, skipped = [], 0
    for _ in range(n_samples):
        for _ in range(max_tries):
            tau = random_tau(rng) if family in ("felder", "intermediate") else None
            tt = tau if tau is not None else 1j
            hbar = 0.2 * random_point(rng, tt)
            z, w = random_point(rng, tt), random_point(rng, tt)
            spec = RMatrixSpec(family, p, l, tau, hbar)
            u0 = [0.3 * random_point(rng, tt) for _ in range(p)]
            hexagon = random_hexagon(rng, p)
            try:
                _probe_weights(spec, u0, hexagon, z, w)
                rep = check_star_triangle(*hexagon, z - w, z, w, spec=spec, tol=tol, u_base=u0)
                break
            except PoleError:
                skipped += 1
        else:
            break
        reps.append(rep)
    worst = max(reps, key=lambda r: r.max_abs) if reps else None
    return ResidualReport(
        "star_triangle", worst.max_abs if worst else float("inf"), tol, seed=seed,
        n_samples=len(reps), n_skipped=skipped,
        params={"family": family, "p": p, "l": l},
        extra={"vacuous": any(r.extra.get("vacuous") for r in reps),
               "worst_params": worst.params if worst else None})


def _probe_weights(spec, u0, hexagon, z, w, eps: float = 1e-3) -> None:
    """Raise :class:`PoleError` if any face of the hexagon is near a pole."""
    W = FaceWeights(spec, u0, eps=eps)
    a, b, c, d, e, f = hexagon
    for g in neighbours(a) + neighbours(b):
        for face, zz in (((a, b, c, g), z - w), ((g, c, d, e), z), ((a, g, e, f), w),
                         ((b, c, d, g), w), ((a, b, g, f), z), ((f, g, d, e), z - w)):
            if admissible(*face):
                W(*face, zz)


# partition function -------------------------------------------------------------

def reference_heights(rows: int, cols: int, a0: Height) -> list[list[Height]]:
    """``h[i][j] = a0 + j mu_1 + i mu_2`` on the ``(rows+1) x (cols+1)`` vertices."""
    p = len(a0)
    mu = weight_vectors(p)
    m1, m2 = mu[0], mu[1 % p]
    return [[tuple(a0[k] + j * m1[k] + i * m2[k] for k in range(p)) for j in range(cols + 1)]
            for i in range(rows + 1)]


def _face_product(h, rows, cols, W, z) -> complex:
    out = 1.0 + 0j
    for i in range(rows):
        for j in range(cols):
            a, b, c, d = h[i][j], h[i][j + 1], h[i + 1][j + 1], h[i + 1][j]
            out *= W(a, b, c, d, z)
    return out


def _grid_admissible(h, rows, cols, p) -> bool:
    for i in range(rows + 1):
        for j in range(cols + 1):
            if j < cols and weight_index(_sub(h[i][j + 1], h[i][j]), p) is None:
                return False
            if i < rows and weight_index(_sub(h[i + 1][j], h[i][j]), p) is None:
                return False
    return True


def _enumerate(rows, cols, boundary, a0, p, boundary_heights):
    """Yield every admissible height grid of size ``(rows+1) x (cols+1)``."""
    mu = weight_vectors(p)
    if boundary == "fixed":
        ref = boundary_heights
        free = [(i, j) for i in range(1, rows) for j in range(1, cols)]
    else:
        # periodic: vertex (rows, j) is (0, j) and (i, cols) is (i, 0)
        free = [(i, j) for i in range(rows) for j in range(cols) if (i, j) != (0, 0)]
    n = len(free)
    if p ** n > MAX_CONFIGS:
        raise ResourceGuardError(f"{p}^{n} height configurations exceed the guard {MAX_CONFIGS}")

    # every free vertex is a neighbour of a vertex above or to its left
    def place(h, k):
        if k == n:
            yield h
            return
        i, j = free[k]
        anchor = h[i - 1][j] if i > 0 else h[i][j - 1]
        for m in mu:
            h[i][j] = _add(anchor, m)
            yield from place(h, k + 1)
        h[i][j] = None

    if boundary == "fixed":
        grid = [[ref[i][j] if (i in (0, rows) or j in (0, cols)) else None
                 for j in range(cols + 1)] for i in range(rows + 1)]
    else:
        grid = [[None] * (cols + 1) for _ in range(rows + 1)]
        grid[0][0] = a0
    for h in place(grid, 0):
        full = [row[:] for row in h]
        if boundary == "periodic":
            for i in range(rows):
                full[i][cols] = full[i][0]
            full[rows] = full[0][:]
        if _grid_admissible(full, rows, cols, p):
            yield full


def partition_function(rows: int, cols: int, boundary: str = "fixed", z=0.1,
                       spec: RMatrixSpec = None, a0=None, u_base=None,
                       boundary_heights=None, weight: Optional[Callable] = None) -> complex:
    """Sum over admissible height configurations of the product of face weights.

    Args:
        rows, cols: number of faces in each direction.
        boundary: ``"fixed"`` (boundary heights prescribed, interior summed)
            or ``"periodic"`` (heights periodic in both directions, with
            ``h[0][0] = a0`` pinned).
        z: spectral parameter shared by all faces.
        spec: dynamical R-matrix with ``l = 1``.
        a0: reference height (a generic rational vector by default).
        u_base: baseline dynamical vector.
        boundary_heights: full ``(rows+1) x (cols+1)`` grid whose boundary
            is used for fixed boundaries; defaults to :func:`reference_heights`.
        weight: override for the face weight ``(a, b, c, d, z) -> complex``.

    Raises:
        ResourceGuardError: when the enumeration would exceed :data:`MAX_CONFIGS`.
    """
    W, p, a0, ref = _setup(rows, cols, boundary, spec, a0, u_base, boundary_heights, weight)
    total = 0j
    for h in _enumerate(rows, cols, boundary, a0, p, ref):
        total += _face_product(h, rows, cols, W, z)
    return complex(total)


DEFAULT_A0 = (Fraction(13, 97), Fraction(-29, 97), Fraction(41, 97), Fraction(-7, 97),
              Fraction(3, 97), Fraction(-17, 97), Fraction(23, 97), Fraction(-31, 97))


def _setup(rows, cols, boundary, spec, a0, u_base, boundary_heights, weight):
    if rows < 1 or cols < 1:
        raise DomainError("lattice needs at least one face")
    if boundary not in ("fixed", "periodic"):
        raise DomainError("boundary must be 'fixed' or 'periodic'")
    if spec is None:
        raise DomainError("spec is required")
    _check_model(spec)
    if spec.l != 1 and weight is None:
        raise DomainError("partition functions are implemented for scalar weights (l = 1)")
    p = spec.p
    a0 = height(a0) if a0 is not None else tuple(DEFAULT_A0[:p])
    if len(a0) != p:
        raise DomainError(f"a0 must have length p={p}")
    ref = None
    if boundary == "fixed":
        ref = boundary_heights if boundary_heights is not None else reference_heights(rows, cols, a0)
        ref = [[height(x) for x in row] for row in ref]
        a0 = ref[0][0]
    W = weight if weight is not None else FaceWeights(spec, u_base)
    return W, p, a0, ref


def _row_states(first: Height, length: int, p: int, last: Optional[Height] = None):
    """All height rows of ``length`` vertices starting at ``first``."""
    mu = weight_vectors(p)
    for steps in itertools.product(range(p), repeat=length - 1):
        row = [first]
        for s in steps:
            row.append(_add(row[-1], mu[s]))
        if last is None or row[-1] == last:
            yield tuple(row)


def partition_function_transfer(rows: int, cols: int, boundary: str = "fixed", z=0.1,
                                spec: RMatrixSpec = None, a0=None, u_base=None,
                                boundary_heights=None, weight: Optional[Callable] = None) -> complex:
    """Same quantity as :func:`partition_function`, by row-to-row transfer matrices.

    Fixed boundaries propagate a vector over admissible rows from the top
    row to the bottom row.  Periodic boundaries take the trace of the
    product of transfer matrices over rows whose first height is ``a0``
    (the only pinned vertex) and whose last height closes the row.
    """
    W, p, a0, ref = _setup(rows, cols, boundary, spec, a0, u_base, boundary_heights, weight)
    if p ** ((rows + 1) * cols) > 50 * MAX_CONFIGS:
        raise ResourceGuardError("transfer-matrix state space exceeds the guard")

    def T(top, bottom):
        out = 1.0 + 0j
        for j in range(len(top) - 1):
            if not admissible(top[j], top[j + 1], bottom[j + 1], bottom[j]):
                return 0j
            out *= W(top[j], top[j + 1], bottom[j + 1], bottom[j], z)
        return out

    if boundary == "fixed":
        vec = {tuple(ref[0]): 1.0 + 0j}
        for i in range(1, rows + 1):
            states = ([tuple(ref[i])] if i == rows
                      else list(_row_states(ref[i][0], cols + 1, p, ref[i][cols])))
            new = {}
            for s in states:
                acc = sum(v * T(t, s) for t, v in vec.items())
                if acc != 0:
                    new[s] = acc
            vec = new
        return complex(sum(vec.values()))

    def closed_rows(first):
        # periodic rows: cols steps that return to a translate-free closure
        for r in _row_states(first, cols + 1, p):
            if r[-1] == r[0]:
                yield r

    mu = weight_vectors(p)
    total = 0j
    for start in closed_rows(a0):
        vec = {start: 1.0 + 0j}
        for _ in range(rows):
            new = {}
            for t, v in vec.items():
                for m in mu:
                    for s in closed_rows(_add(t[0], m)):
                        val = T(t, s)
                        if val != 0:
                            new[s] = new.get(s, 0j) + v * val
            vec = new
        total += vec.get(start, 0j)
    return complex(total)
