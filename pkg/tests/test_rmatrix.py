"""Tests for the R-matrix builders and their limits."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_rmatrix import elliptic as el
from elliptic_rmatrix import rmatrix as rm
from elliptic_rmatrix.errors import DomainError, ExtrapolationError, PoleError

ATOL = 1e-12
TAU = el.ModularParam(0.11 + 1.03j)
HBAR = 0.13 - 0.04j
Z = 0.27 + 0.19j
TWO_PI_I = 2j * np.pi


def clock_shift(m):
    """Clock and shift matrices written out directly."""
    Q = np.diag(np.exp(TWO_PI_I * np.arange(1, m + 1) / m))
    L = np.zeros((m, m))
    for k in range(m):
        L[k, (k + 1) % m] = 1
    return Q, L


def t_oracle(a1, a2, m):
    Q, L = clock_shift(m)
    return (m / TWO_PI_I) * np.exp(TWO_PI_I * a1 * a2 / (2 * m)) * (
        np.linalg.matrix_power(Q, a1 % m) @ np.linalg.matrix_power(L, a2 % m))


def unit(i, j, n):
    E = np.zeros((n, n), dtype=complex)
    E[i, j] = 1
    return E


def felder_oracle(N, u, z, hbar, tau):
    """Entry-by-entry Felder matrix: basis vector e_i (x) e_j is index i N + j."""
    R = np.zeros((N * N, N * N), dtype=complex)
    for i in range(N):
        for j in range(N):
            R[i * N + j, j * N + i] += el.phi(u[i] - u[j] + (hbar if i == j else 0), z, tau)
            if i != j:
                R[i * N + j, i * N + j] += el.phi(u[j] - u[i], hbar, tau)
    return R


def vertex_oracle(N, z, hbar, tau):
    R = np.zeros((N * N, N * N), dtype=complex)
    for a1 in range(N):
        for a2 in range(N):
            c = el.phi_deformed((a1, a2), N, hbar, z, tau)
            # T_a (x) T_-a with the integer negative; reduction phases cancel in the product
            R += c * np.kron(t_oracle(a1, a2, N), t_oracle(-a1, -a2, N))
    return R


class TestSpec:
    def test_family_constraints(self):
        with pytest.raises(DomainError):
            rm.RMatrixSpec("vertex", 2, 2, TAU)
        with pytest.raises(DomainError):
            rm.RMatrixSpec("felder", 2, 2, TAU)
        with pytest.raises(DomainError):
            rm.RMatrixSpec("intermediate", 2, 2, None)
        with pytest.raises(DomainError):
            rm.RMatrixSpec("bogus", 1, 1, TAU)
        with pytest.raises(DomainError):
            rm.RMatrixSpec("intermediate", 2, 2, TAU, rho="other")

    def test_tau_coerced(self):
        s = rm.RMatrixSpec("intermediate", 2, 2, 1j)
        assert isinstance(s.tau, el.ModularParam)
        assert s.N == 4 and s.dynamical

    def test_trig_needs_no_tau(self):
        assert rm.RMatrixSpec("trig", 2, 2).tau is None

    def test_dynamical_vector_length(self):
        with pytest.raises(DomainError):
            rm.build_intermediate(2, 2, [0.1], Z, HBAR, TAU)


class TestVertex:
    @pytest.mark.parametrize("N", [2, 3])
    def test_matches_direct_sum(self, N):
        R = rm.build_vertex(N, Z, HBAR, TAU).entries
        assert np.abs(R - vertex_oracle(N, Z, HBAR, TAU)).max() < 1e-11

    def test_factor_structure(self):
        op = rm.build_vertex(3, Z, HBAR, TAU)
        assert op.factor_dims == (3, 3) and op.shape == (9, 9)

    def test_pole_names_term(self):
        with pytest.raises(PoleError) as info:
            rm.build_vertex(2, 0.0, HBAR, TAU)
        assert "vertex term" in str(info.value)


class TestFelder:
    U = [0.21 + 0.05j, -0.17 + 0.11j, 0.04 - 0.2j]

    @pytest.mark.parametrize("N", [2, 3])
    def test_hand_expanded_entries(self, N):
        u = self.U[:N]
        R = rm.build_felder(N, u, Z, HBAR, TAU).entries
        assert np.abs(R - felder_oracle(N, u, Z, HBAR, TAU)).max() < ATOL

    def test_weight_zero(self):
        N = 3
        R = rm.build_felder(N, self.U, Z, HBAR, TAU).entries
        rng = np.random.default_rng(1)
        X = np.diag(rng.normal(size=N) + 1j * rng.normal(size=N))
        H = np.kron(X, np.eye(N)) + np.kron(np.eye(N), X)
        assert np.abs(H @ R - R @ H).max() < ATOL

    def test_uniform_shift_of_u(self):
        A = rm.build_felder(3, self.U, Z, HBAR, TAU).entries
        B = rm.build_felder(3, [x + 0.3 - 0.1j for x in self.U], Z, HBAR, TAU).entries
        assert np.abs(A - B).max() < 1e-11

    def test_pole_names_pair(self):
        with pytest.raises(PoleError) as info:
            rm.build_felder(2, [0.1, 0.1], Z, HBAR, TAU)
        assert "felder" in str(info.value)


class TestIntermediate:
    U = [0.21 + 0.05j, -0.17 + 0.11j, 0.04 - 0.2j]

    @pytest.mark.parametrize("p,l", [(2, 2), (2, 3), (3, 2)])
    def test_weight_zero_on_invariant_cartan(self, p, l):
        u = self.U[:p]
        R = rm.build_intermediate(p, l, u, Z, HBAR, TAU).entries
        X = np.kron(np.diag([0.3, -0.7 + 0.2j, 0.4][:p]), np.eye(l))
        N = p * l
        H = np.kron(X, np.eye(N)) + np.kron(np.eye(N), X)
        assert np.abs(H @ R - R @ H).max() < 1e-11

    @pytest.mark.parametrize("p,l", [(2, 2), (3, 2)])
    def test_uniform_shift_of_u(self, p, l):
        u = self.U[:p]
        A = rm.build_intermediate(p, l, u, Z, HBAR, TAU).entries
        B = rm.build_intermediate(p, l, [x - 0.25 for x in u], Z, HBAR, TAU).entries
        assert np.abs(A - B).max() < 1e-11

    @pytest.mark.parametrize("N", [2, 3])
    def test_degenerates_to_vertex(self, N):
        R = rm.build_intermediate(1, N, [0.0], -Z, HBAR, TAU).entries
        V = rm.build_vertex(N, Z, HBAR, TAU).entries
        assert np.abs(rm.vertex_from_intermediate(R) - V).max() < ATOL

    @pytest.mark.parametrize("N", [2, 3])
    def test_degenerates_to_felder(self, N):
        u = self.U[:N]
        R = rm.build_intermediate(N, 1, u, -Z, HBAR, TAU).entries
        F = rm.build_felder(N, u, Z, HBAR, TAU).entries
        assert np.abs(rm.felder_from_intermediate(R) - F).max() < 1e-11

    def test_rho_variants_at_l_one_differ_by_cartan_sign(self):
        u = self.U[:2]
        A = rm.build_intermediate(2, 1, u, Z, HBAR, TAU, rho="scaled").entries
        B = rm.build_intermediate(2, 1, u, Z, HBAR, TAU, rho="unscaled").entries
        # at l = 1 the diagonal entries of e_0 (x) e_1 and e_1 (x) e_0 hold only the Cartan term
        cartan = [1, 2]
        off = np.ones(A.shape, dtype=bool)
        off[cartan, cartan] = False
        assert np.abs((A - B)[off]).max() < ATOL
        assert np.abs(A[cartan, cartan] + B[cartan, cartan]).max() < 1e-11
        assert np.abs(A[cartan, cartan]).min() > 1e-3

    def test_rho_variants_differ_at_l_two(self):
        u = self.U[:2]
        A = rm.build_intermediate(2, 2, u, Z, HBAR, TAU, rho="scaled").entries
        B = rm.build_intermediate(2, 2, u, Z, HBAR, TAU, rho="unscaled").entries
        assert np.abs(A - B).max() > 1e-3

    def test_pole_names_term(self):
        with pytest.raises(PoleError) as info:
            rm.build_intermediate(2, 2, [0.1, 0.1], Z, HBAR, TAU)
        assert "intermediate" in str(info.value)


class TestTrigRational:
    U = [0.21 + 0.05j, -0.17 + 0.11j]

    @pytest.mark.parametrize("p,l", [(2, 2), (1, 3), (2, 1)])
    def test_trig_is_large_im_tau_limit(self, p, l):
        u = self.U[:p]
        A = rm.build_intermediate(p, l, u, Z, HBAR, el.ModularParam(15j)).entries
        B = rm.build_trig(p, l, u, Z, HBAR).entries
        assert np.abs(A - B).max() < 1e-8 * max(1, np.abs(A).max())

    def test_rational_is_scaling_limit(self):
        u = self.U
        R = rm.build_rational(2, 2, u, Z, HBAR).entries
        for eps in (1e-4, 1e-5):
            T = eps * rm.build_trig(2, 2, [eps * x for x in u], eps * Z, eps * HBAR).entries
            assert np.abs(T - R).max() < 1e3 * eps

    def test_rational_offdiagonal_lattice_terms_independent_of_u(self):
        # entries with a2 != 0 do not see u; changing u leaves them fixed
        A = rm.build_rational(1, 3, [0.0], Z, HBAR).entries
        B = rm.build_rational(1, 3, [0.4], Z, HBAR).entries
        assert np.abs(A - B).max() < ATOL

    def test_trig_cartan_coefficient_at_coinciding_u(self):
        # l phi_trig(l u, -l hbar) tends to l pi cot(-pi l hbar) + l/u-pole: it must blow up
        with np.errstate(all="ignore"):
            R = rm.build_trig(2, 2, [0.1, 0.1 + 1e-9], Z, HBAR).entries
        assert np.abs(R).max() > 1e6


class TestClassical:
    U = [0.21 + 0.05j, -0.17 + 0.11j, 0.04 - 0.2j]

    @pytest.mark.parametrize("N", [2, 3])
    def test_vertex_numeric_matches_closed(self, N):
        spec = rm.RMatrixSpec("vertex", 1, N, TAU, 0.1)
        num = rm.classical_limit_numeric(spec, None, Z)
        closed = rm.classical_r("vertex", N, Z, tau=TAU)
        assert np.abs(num.r.entries - closed.r.entries).max() < 1e-6
        assert abs(num.normalization - (N / TWO_PI_I) ** 2) < 1e-9

    @pytest.mark.parametrize("N", [2, 3])
    def test_felder_numeric_matches_closed(self, N):
        u = self.U[:N]
        spec = rm.RMatrixSpec("felder", N, 1, TAU, 0.1)
        num = rm.classical_limit_numeric(spec, u, Z)
        closed = rm.classical_r("felder", N, Z, u, TAU)
        assert np.abs(num.r.entries - closed.r.entries).max() < 1e-6
        assert abs(num.normalization - 1) < 1e-9

    def test_intermediate_normalization(self):
        spec = rm.RMatrixSpec("intermediate", 2, 2, TAU, 0.1)
        num = rm.classical_limit_numeric(spec, self.U[:2], Z)
        assert abs(num.normalization + (2 / TWO_PI_I) ** 2) < 1e-9

    def test_symmetric_beats_one_sided(self):
        spec = rm.RMatrixSpec("felder", 2, 1, TAU, 0.1)
        closed = rm.classical_r("felder", 2, Z, self.U[:2], TAU).r.entries
        errs = [np.abs(rm.classical_limit_numeric(spec, self.U[:2], Z, symmetric=s, rtol=1).r.entries
                       - closed).max() for s in (True, False)]
        assert errs[0] < errs[1]

    def test_callable_builder(self):
        # R(h) = Id/h + M + h M^2 has classical part M
        M = np.array([[1.0, 2.0], [0.5j, -1.0]])
        res = rm.classical_limit_numeric(lambda h: np.eye(2) / h + M + h * M @ M)
        assert np.abs(res.r.entries - M).max() < 1e-10

    def test_non_scalar_leading_term(self):
        D = np.diag([1.0, 2.0])
        with pytest.raises(ExtrapolationError):
            rm.classical_limit_numeric(lambda h: D / h)

    def test_needs_three_samples(self):
        with pytest.raises(DomainError):
            rm.classical_limit_numeric(lambda h: np.eye(2) / h, hbar_samples=(1e-2, 5e-3))

    def test_drop_cartan(self):
        a = rm.classical_r("felder", 2, Z, self.U[:2], TAU).r.entries
        b = rm.classical_r("felder", 2, Z, self.U[:2], TAU, drop_cartan=True).r.entries
        diff = a - b
        # only the E_ii (x) E_jj (i != j) diagonal entries differ
        assert np.count_nonzero(np.abs(diff) > 0) == 2

    def test_closed_form_family_check(self):
        with pytest.raises(DomainError):
            rm.classical_r("intermediate", 4, Z, tau=TAU)


class TestRichardson:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
    def test_exact_on_quadratics(self, c):
        hs = [0.1, 0.05, 0.025]
        vals = [c[0] + c[1] * h + c[2] * h * h for h in hs]
        est, _ = rm.richardson(vals, hs)
        assert abs(est - c[0]) < 1e-9 * (1 + sum(abs(x) for x in c))

    def test_mismatched_lengths(self):
        with pytest.raises(DomainError):
            rm.richardson([1.0, 2.0], [0.1])
