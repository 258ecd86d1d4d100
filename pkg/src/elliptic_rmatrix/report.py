"""Residual reports and their JSON / CSV serializations.

Both formats round-trip byte for byte: parsing a serialized bundle and
serializing it again reproduces the input.  Complex numbers travel as
``"re,im"`` strings built from ``repr`` of the two floats.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable

import numpy as np

SCHEMA_VERSION = "1"

CSV_FIELDS = ("check", "passed", "max_abs", "frobenius", "scale", "tol", "seed",
              "n_samples", "n_skipped", "params", "extra")


def encode_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r},{z.imag!r}"


def decode_complex(s: str) -> complex:
    """Parse ``"re,im"`` (or a bare real number)."""
    parts = [p.strip() for p in str(s).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError(f"cannot parse complex number {s!r}")
    return complex(float(parts[0]), float(parts[1]))


def to_jsonable(x: Any) -> Any:
    """Convert numbers, arrays and containers to JSON-native values."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _finite(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return encode_complex(x)
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _finite(v: float):
    # JSON has no inf/nan; keep them as strings
    if math.isfinite(v):
        return v
    return repr(v)


@dataclass
class ResidualReport:
    """Outcome of one verification.

    ``max_abs`` is the gated quantity; residuals are relative unless the
    check says otherwise in ``extra["normalization"]``.
    """

    check: str
    max_abs: float
    tol: float
    frobenius: float = 0.0
    scale: Any = 1.0
    seed: Any = None
    n_samples: int = 1
    n_skipped: int = 0
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    passed: bool = field(default=False)

    def __post_init__(self):
        self.max_abs = _as_float(self.max_abs)
        self.frobenius = _as_float(self.frobenius)
        self.tol = _as_float(self.tol)
        self.params = to_jsonable(self.params)
        self.extra = to_jsonable(self.extra)
        self.scale = to_jsonable(self.scale)
        self.passed = bool(math.isfinite(self.max_abs) and self.max_abs < self.tol
                           and self.n_samples > 0 and not self.extra.get("vacuous", False))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        d = dict(d)
        d.pop("passed", None)
        return cls(**d)

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.check}: max_abs={self.max_abs:.3e} (tol {self.tol:.1e}, n={self.n_samples})"


def _as_float(x) -> float:
    if isinstance(x, str):
        return float(x)
    return float(x)


def merge(check: str, reports: Iterable[ResidualReport], tol: float, **kw) -> ResidualReport:
    """Aggregate per-sample reports by maximum (order independent)."""
    reps = list(reports)
    if not reps:
        return ResidualReport(check, float("inf"), tol, n_samples=0, **kw)
    worst = max(reps, key=lambda r: r.max_abs)
    extra = dict(kw.pop("extra", {}))
    extra.setdefault("worst_params", worst.params)
    return ResidualReport(check, max(r.max_abs for r in reps), tol,
                          frobenius=max(r.frobenius for r in reps),
                          n_samples=sum(r.n_samples for r in reps),
                          n_skipped=sum(r.n_skipped for r in reps) + kw.pop("n_skipped", 0),
                          extra=extra, **kw)


@dataclass
class ReportBundle:
    """``{header, config, results}`` as written by the command-line tool."""

    header: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    results: list = field(default_factory=list)

    def __post_init__(self):
        self.header = to_jsonable(self.header)
        self.config = to_jsonable(self.config)
        self.header.setdefault("version", SCHEMA_VERSION)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, report: ResidualReport) -> None:
        self.results.append(report)

    # JSON --------------------------------------------------------------
    def to_json(self) -> str:
        d = {"header": self.header, "config": self.config,
             "results": [r.to_dict() for r in self.results]}
        return json.dumps(d, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportBundle":
        d = json.loads(text)
        return cls(d.get("header", {}), d.get("config", {}),
                   [ResidualReport.from_dict(r) for r in d.get("results", [])])

    # CSV ---------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = json.dumps({"config": self.config, "header": self.header},
                          sort_keys=True, separators=(",", ":"))
        buf.write("# " + meta + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.results:
            w.writerow([r.check, "1" if r.passed else "0", repr(r.max_abs), repr(r.frobenius),
                        json.dumps(r.scale), repr(r.tol), json.dumps(r.seed), r.n_samples,
                        r.n_skipped, json.dumps(r.params, sort_keys=True, separators=(",", ":")),
                        json.dumps(r.extra, sort_keys=True, separators=(",", ":"))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ReportBundle":
        first, _, rest = text.partition("\n")
        if not first.startswith("# "):
            raise ValueError("CSV report must start with a '# ' metadata line")
        meta = json.loads(first[2:])
        rows = list(csv.reader(io.StringIO(rest)))
        if not rows or tuple(rows[0]) != CSV_FIELDS:
            raise ValueError("unexpected CSV columns")
        results = []
        for row in rows[1:]:
            rec = dict(zip(CSV_FIELDS, row))
            results.append(ResidualReport(
                check=rec["check"], max_abs=float(rec["max_abs"]), tol=float(rec["tol"]),
                frobenius=float(rec["frobenius"]), scale=json.loads(rec["scale"]),
                seed=json.loads(rec["seed"]), n_samples=int(rec["n_samples"]),
                n_skipped=int(rec["n_skipped"]), params=json.loads(rec["params"]),
                extra=json.loads(rec["extra"])))
        return cls(meta.get("header", {}), meta.get("config", {}), results)
