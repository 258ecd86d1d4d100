"""Tests for the IRF face weights, star-triangle relation and partition functions."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from elliptic_rmatrix import elliptic as el
from elliptic_rmatrix import irf
from elliptic_rmatrix.errors import AdmissibilityError, DomainError, ResourceGuardError
from elliptic_rmatrix.rmatrix import RMatrixSpec

ATOL = 1e-12
STAR_TOL = 1e-9
TAU = el.ModularParam(0.07 + 1.1j)
HBAR = 0.17 - 0.05j
Z = 0.23 + 0.11j


def felder_face_oracle(a, b, c, d, z, hbar, tau, u0):
    """Felder face weight read off the matrix entries by hand."""
    p = len(a)
    step = lambda x, y: [float(v - u) + 1 / p for u, v in zip(x, y)].index(1.0)
    u = [u0[k] + hbar * float(a[k] + c[k]) / 2 for k in range(p)]
    i, j = step(b, c), step(a, b)
    if b == d:
        return el.phi(u[i] - u[j] + (hbar if i == j else 0), z, tau)
    return el.phi(u[j] - u[i], hbar, tau)


def faces(p, a):
    """Every admissible face with top-left corner ``a``."""
    for b in irf.neighbours(a):
        for d in irf.neighbours(a):
            for c in irf.neighbours(b):
                if irf.admissible(a, b, c, d):
                    yield a, b, c, d


class TestHeights:
    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_weights_sum_to_zero(self, p):
        mu = irf.weight_vectors(p)
        assert len(mu) == p
        for m in mu:
            assert sum(m) == 0
        assert irf.weight_index(mu[p - 1], p) == p - 1

    @pytest.mark.parametrize("p", [2, 3])
    def test_neighbour_graph_regular(self, p):
        a = irf.height([Fraction(1, 7)] * p)
        nb = irf.neighbours(a)
        assert len(set(nb)) == p
        # heights differing by a non-weight are not neighbours
        assert irf.weight_index(tuple(Fraction(0) for _ in range(p)), p) is None

    def test_admissible(self):
        a = irf.height([0, 0])
        b, d = irf.neighbours(a)
        assert irf.admissible(a, b, irf.neighbours(b)[1], d)
        assert not irf.admissible(a, b, b, d)

    def test_inadmissible_face_raises(self):
        spec = RMatrixSpec("felder", 2, 1, TAU, HBAR)
        with pytest.raises(AdmissibilityError):
            irf.boltzmann_weight((0, 0), (0, 0), (0, 0), (0, 0), Z, spec)

    def test_non_dynamical_family_rejected(self):
        with pytest.raises(DomainError):
            irf.FaceWeights(RMatrixSpec("vertex", 1, 2, TAU, HBAR))


class TestFaceWeights:
    @pytest.mark.parametrize("p", [2, 3])
    def test_felder_entries(self, p):
        spec = RMatrixSpec("felder", p, 1, TAU, HBAR)
        u0 = [0.05j * k for k in range(p)]
        W = irf.FaceWeights(spec, u0)
        a = irf.height([Fraction(3 * k - 2, 11) for k in range(p)])
        n = 0
        for face in faces(p, a):
            got = W(*face, Z)
            assert abs(got - felder_face_oracle(*face, Z, HBAR, TAU, u0)) < ATOL * max(1, abs(got))
            n += 1
        # one d for a repeated step, two for distinct steps
        assert n == 2 * p * p - p

    @pytest.mark.parametrize("family,p,l", [("felder", 2, 1), ("felder", 3, 1),
                                            ("intermediate", 2, 2)])
    def test_common_shift_absorbed_by_baseline(self, family, p, l):
        # a + t with baseline u0 - hbar t gives the same weight
        spec = RMatrixSpec(family, p, l, TAU, HBAR)
        shift = irf.height([Fraction(5, 13), Fraction(-2, 9)] + [Fraction(1, 3)] * (p - 2))
        u0 = np.array([0.1 - 0.02j * k for k in range(p)])
        W0 = irf.FaceWeights(spec, u0)
        W1 = irf.FaceWeights(spec, u0 - HBAR * np.array([float(x) for x in shift]))
        a = irf.height([Fraction(1, 17)] * p)
        for face in faces(p, a):
            moved = [irf._add(h, shift) for h in face]
            assert np.abs(np.asarray(W0(*face, Z)) - np.asarray(W1(*moved, Z))).max() < ATOL

    def test_intermediate_blocks(self):
        spec = RMatrixSpec("intermediate", 2, 2, TAU, HBAR)
        a = irf.height([Fraction(1, 7), Fraction(-2, 7)])
        for face in faces(2, a):
            assert irf.FaceWeights(spec)(*face, Z).shape == (2, 2, 2, 2)


class TestStarTriangle:
    @pytest.mark.parametrize("family,p,l", [("felder", 2, 1), ("felder", 3, 1),
                                            ("intermediate", 2, 2)])
    def test_sweep(self, family, p, l):
        rep = irf.star_triangle_sweep(family, p, l, n_samples=10, seed=3, tol=STAR_TOL)
        assert rep.passed, rep.summary()
        assert rep.n_samples == 10

    def test_single_hexagon(self):
        rng = np.random.default_rng(1)
        hexagon = irf.random_hexagon(rng, 2)
        spec = RMatrixSpec("felder", 2, 1, TAU, HBAR)
        rep = irf.check_star_triangle(*hexagon, 0.31 + 0.05j, z23=0.12 - 0.2j, spec=spec)
        assert rep.passed and not rep.extra["vacuous"]
        assert rep.extra["n_g_lhs"] > 0

    def test_z13_mismatch(self):
        spec = RMatrixSpec("felder", 2, 1, TAU, HBAR)
        hexagon = irf.random_hexagon(np.random.default_rng(0), 2)
        with pytest.raises(DomainError):
            irf.check_star_triangle(*hexagon, 0.1, 0.5, 0.2, spec=spec)

    def test_bad_boundary_edge(self):
        spec = RMatrixSpec("felder", 2, 1, TAU, HBAR)
        a, b, c, d, e, f = irf.random_hexagon(np.random.default_rng(0), 2)
        with pytest.raises(AdmissibilityError):
            irf.check_star_triangle(a, a, c, d, e, f, 0.1, z23=0.2, spec=spec)

    def test_vacuous_never_passes(self):
        rep = irf.ResidualReport("star_triangle", 0.0, STAR_TOL, extra={"vacuous": True})
        assert not rep.passed

    def test_straight_hexagon_not_vacuous(self):
        spec = RMatrixSpec("felder", 2, 1, TAU, HBAR)
        a = irf.height([Fraction(1, 7), Fraction(-3, 7)])
        mu = irf.weight_vectors(2)
        b = irf._add(a, mu[0])
        c = irf._add(b, mu[0])
        d = irf._add(c, mu[0])
        rep = irf.check_star_triangle(a, b, c, d, c, b, 0.1, z23=0.2, spec=spec)
        assert not rep.extra["vacuous"] and rep.passed


class TestPartitionFunction:
    SPEC = RMatrixSpec("felder", 2, 1, TAU, HBAR)

    def test_single_face(self):
        h = irf.reference_heights(1, 1, irf.DEFAULT_A0[:2])
        Z1 = irf.partition_function(1, 1, "fixed", Z, self.SPEC)
        w = irf.boltzmann_weight(h[0][0], h[0][1], h[1][1], h[1][0], Z, self.SPEC)
        assert abs(Z1 - w) < ATOL

    @pytest.mark.parametrize("boundary,rows,cols", [("fixed", 2, 2), ("fixed", 3, 3),
                                                    ("periodic", 2, 2), ("periodic", 2, 4)])
    def test_transfer_matches_enumeration(self, boundary, rows, cols):
        a = irf.partition_function(rows, cols, boundary, Z, self.SPEC)
        b = irf.partition_function_transfer(rows, cols, boundary, Z, self.SPEC)
        assert abs(a - b) < ATOL * max(1, abs(a))
        assert a != 0

    def test_brute_force_oracle(self):
        # independent sum over every interior height of a 2x2 fixed lattice
        h = irf.reference_heights(2, 2, irf.DEFAULT_A0[:2])
        W = irf.FaceWeights(self.SPEC)
        total = 0j
        for g in irf.neighbours(h[0][1]):
            grid = [row[:] for row in h]
            grid[1][1] = g
            term = 1 + 0j
            try:
                for i, j in itertools.product(range(2), repeat=2):
                    term *= W(grid[i][j], grid[i][j + 1], grid[i + 1][j + 1], grid[i + 1][j], Z)
            except AdmissibilityError:
                continue
            total += term
        assert abs(total - irf.partition_function(2, 2, "fixed", Z, self.SPEC)) < ATOL

    def test_rescaled_weight(self):
        W = irf.FaceWeights(self.SPEC)
        s = 1.7 - 0.3j
        scaled = lambda a, b, c, d, z: s * W(a, b, c, d, z)
        for boundary in ("fixed", "periodic"):
            base = irf.partition_function(2, 2, boundary, Z, self.SPEC)
            got = irf.partition_function(2, 2, boundary, Z, self.SPEC, weight=scaled)
            assert abs(got - s ** 4 * base) < ATOL * max(1, abs(got))

    def test_common_translation(self):
        t = [Fraction(2, 5), Fraction(-1, 3)]
        a0 = irf.DEFAULT_A0[:2]
        moved = irf._add(a0, tuple(t))
        u1 = -HBAR * np.array([float(x) for x in t])
        z0 = irf.partition_function(2, 2, "fixed", Z, self.SPEC, a0=a0)
        z1 = irf.partition_function(2, 2, "fixed", Z, self.SPEC, a0=moved, u_base=u1)
        assert abs(z0 - z1) < ATOL * max(1, abs(z0))

    def test_resource_guard(self):
        with pytest.raises(ResourceGuardError):
            irf.partition_function(6, 6, "periodic", Z, self.SPEC)

    def test_matrix_weights_need_override(self):
        with pytest.raises(DomainError):
            irf.partition_function(1, 1, "fixed", Z, RMatrixSpec("intermediate", 2, 2, TAU, HBAR))

    def test_bad_boundary(self):
        with pytest.raises(DomainError):
            irf.partition_function(1, 1, "open", Z, self.SPEC)
