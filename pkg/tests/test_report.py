"""Tests for residual reports and their serializations."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_rmatrix.report import (ReportBundle, ResidualReport, decode_complex, encode_complex,
                                     merge, to_jsonable)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def sample_bundle() -> ReportBundle:
    b = ReportBundle(header={"seed": 3, "conventions": {"sign": -1}},
                     config={"tau": 0.1 + 1j, "p": 2})
    b.add(ResidualReport("qybe", 1.25e-15, 1e-9, frobenius=3e-15, seed=3, n_samples=20,
                         params={"tau": 0.1 + 1.1j, "u": np.array([0.5j, -0.25])},
                         extra={"note": "a,b \"quoted\""}))
    b.add(ResidualReport("broken", float("inf"), 1e-9, n_samples=0, extra={"vacuous": True}))
    return b


class TestComplexEncoding:
    @settings(max_examples=100, deadline=None)
    @given(finite, finite)
    def test_round_trip(self, re, im):
        z = complex(re, im)
        assert decode_complex(encode_complex(z)) == z

    def test_bare_real(self):
        assert decode_complex("2.5") == 2.5 + 0j

    def test_malformed(self):
        with pytest.raises(ValueError):
            decode_complex("1,2,3")


class TestJsonable:
    def test_nested(self):
        out = to_jsonable({"a": (1, np.float64(2.0)), 3: np.array([1j]), "b": np.bool_(True)})
        assert out == {"a": [1, 2.0], "3": ["0.0,1.0"], "b": True}

    def test_non_finite_as_strings(self):
        assert to_jsonable([math.inf, -math.inf]) == ["inf", "-inf"]
        assert to_jsonable(math.nan) == "nan"


class TestPassed:
    def test_below_tol(self):
        assert ResidualReport("x", 1e-12, 1e-10).passed

    def test_at_tol_fails(self):
        assert not ResidualReport("x", 1e-10, 1e-10).passed

    def test_non_finite_fails(self):
        assert not ResidualReport("x", math.nan, 1.0).passed
        assert not ResidualReport("x", math.inf, 1.0).passed

    def test_no_samples_fails(self):
        assert not ResidualReport("x", 0.0, 1.0, n_samples=0).passed

    def test_vacuous_fails(self):
        assert not ResidualReport("x", 0.0, 1.0, extra={"vacuous": True}).passed

    def test_summary(self):
        assert ResidualReport("qybe", 1e-15, 1e-9).summary().startswith("PASS qybe")


class TestMerge:
    def test_max_and_counts(self):
        reps = [ResidualReport("a", 1e-12, 1, n_samples=2, n_skipped=1, params={"k": 1}),
                ResidualReport("a", 3e-12, 1, n_samples=5, params={"k": 2})]
        m = merge("a", reps, 1e-9)
        assert m.max_abs == 3e-12 and m.n_samples == 7 and m.n_skipped == 1
        assert m.extra["worst_params"] == {"k": 2}

    def test_order_independent(self):
        reps = [ResidualReport("a", v, 1) for v in (1e-3, 5e-4, 2e-3)]
        assert merge("a", reps, 1).to_dict() == merge("a", reps[::-1], 1).to_dict()

    def test_empty_fails(self):
        assert not merge("a", [], 1.0).passed


class TestBundle:
    def test_json_round_trip_bytes(self):
        text = sample_bundle().to_json()
        assert ReportBundle.from_json(text).to_json() == text

    def test_csv_round_trip_bytes(self):
        text = sample_bundle().to_csv()
        assert ReportBundle.from_csv(text).to_csv() == text

    def test_json_csv_agree(self):
        b = sample_bundle()
        via_csv = ReportBundle.from_csv(b.to_csv())
        assert via_csv.to_json() == b.to_json()

    def test_passed_needs_all(self):
        b = sample_bundle()
        assert not b.passed
        b.results.pop()
        assert b.passed

    def test_version_default(self):
        assert ReportBundle().header["version"]

    def test_csv_needs_metadata(self):
        with pytest.raises(ValueError):
            ReportBundle.from_csv("check,passed\n")
