"""Tests for the randomised elliptic identity checks."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_rmatrix import identities as ids
from elliptic_rmatrix.errors import PoleError

TOL = 1e-10


class TestResidual:
    def test_cancellation(self):
        assert ids.residual([1.0, -1.0]) == 0.0

    def test_small_terms_absolute(self):
        assert ids.residual([1e-3, 1e-3]) == pytest.approx(2e-3)

    def test_large_terms_relative(self):
        assert ids.residual([1e6, -1e6 + 1]) == pytest.approx(1 / 2e6)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.complex_numbers(max_magnitude=1e8, allow_nan=False), min_size=1, max_size=6))
    def test_bounded_by_one(self, terms):
        assert 0 <= ids.residual(terms) <= 1 + 1e-12


class TestIdentities:
    @pytest.mark.parametrize("name", list(ids.IDENTITIES))
    def test_fixed_tau(self, name):
        rep = ids.run_identity(name, n_samples=100, tol=TOL, seed=7, tau=1j)
        assert rep.passed, rep.summary()
        assert rep.n_samples == 100

    @pytest.mark.parametrize("name", ["fay", "heat", "deformed_three_term"])
    def test_sampled_tau(self, name):
        rep = ids.run_identity(name, n_samples=30, tol=TOL, seed=2)
        assert rep.passed, rep.summary()
        assert rep.params["tau"] == "sampled"

    def test_lattice_sum_orders(self):
        assert {"lattice_sum_m2", "lattice_sum_m3", "lattice_sum_m4"} <= set(ids.IDENTITIES)

    def test_broken_identity_fails(self, monkeypatch):
        monkeypatch.setitem(ids.IDENTITIES, "broken", lambda rng, tau, eps: [1.0, -0.5])
        rep = ids.run_identity("broken", n_samples=5, tol=TOL)
        assert not rep.passed and rep.max_abs == pytest.approx(1 / 3)


class TestSuite:
    def test_deterministic(self):
        a = ids.identity_suite(tau=1j, n_samples=10, seed=4)
        b = ids.identity_suite(tau=1j, n_samples=10, seed=4)
        assert [r.to_dict() for r in a] == [r.to_dict() for r in b]

    def test_subset_reproduces_full_run(self):
        full = {r.check: r for r in ids.identity_suite(n_samples=10, seed=5)}
        sub = ids.identity_suite(n_samples=10, seed=5, names=["heat", "cubic"])
        for r in sub:
            assert r.to_dict() == full[r.check].to_dict()

    def test_pole_draws_recorded(self, monkeypatch):
        calls = {"n": 0}

        def flaky(rng, tau, eps):
            calls["n"] += 1
            if calls["n"] % 2:
                raise PoleError("near a pole")
            return [0.0]

        monkeypatch.setitem(ids.IDENTITIES, "flaky", flaky)
        rep = ids.run_identity("flaky", n_samples=4)
        assert rep.n_samples == 4 and rep.n_skipped == 4 and rep.passed

    def test_sample_points_in_rectangle(self):
        rng = np.random.default_rng(0)
        tau = 0.3 + 1.2j
        for _ in range(200):
            z = ids._point(rng, tau)
            y = z.imag / tau.imag
            x = z.real - y * tau.real
            assert -0.5 <= x < 0.5 and -0.5 <= y < 0.5
