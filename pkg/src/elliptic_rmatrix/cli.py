"""Command-line front end.

Usage::

    python -m elliptic_rmatrix identities --tau 0,1 --samples 100
    python -m elliptic_rmatrix build --family felder --p 2 --z 0.2,0.1 --u "0.3,0;-0.1,0.2"
    python -m elliptic_rmatrix verify --family intermediate --p 2 --l 2 --samples 20
    python -m elliptic_rmatrix limits --family felder --p 2
    python -m elliptic_rmatrix irf --family felder --p 2 --samples 50
    python -m elliptic_rmatrix report results.json --format csv

Complex numbers are written ``re,im`` (``0+1i`` and ``1j`` forms are also
read).  Lists of complex numbers are separated by ``;``.  A config file
(``--config``) holds one section per subcommand plus an optional
``[common]`` section; flags given on the command line win.

Exit codes: 0 all gated checks passed, 1 a check failed, 2 usage or
configuration error, 3 resource guard.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import json
import os
import re
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import elliptic as el
from . import irf, verifier
from .errors import DomainError, ResourceGuardError
from .identities import IDENTITIES, identity_suite
from .report import ReportBundle, ResidualReport, encode_complex
from .rmatrix import FAMILIES, RMatrixSpec, build

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

#: env var naming the default directory for report files
OUTDIR_ENV = "ELLIPTIC_RMATRIX_OUTDIR"

#: largest ``p * l`` accepted for checks on V (x) V (x) V
MAX_TRIPLE_N = 8

CHECKS = ("qybe", "qdybe", "unitarity", "symmetries", "classical")

DEFAULT_TOLS = {"qybe": 1e-9, "qdybe": 1e-9, "unitarity": 1e-10, "symmetries": 1e-10,
                "classical": 1e-8, "cybe": 1e-10, "classical_match": 1e-6, "trig_limit": 1e-8,
                "rational_limit": 1e-6, "degeneration": 1e-12, "star_triangle": 1e-9,
                "partition": 1e-12, "identities": 1e-10}


class UsageError(Exception):
    """Bad flag or config value (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# parsing helpers ------------------------------------------------------------------

_COMPLEX_I = re.compile(r"^\s*([-+]?[\d.eE+-]*?)\s*([-+])\s*([\d.eE+-]*)\s*[ij]\s*$")


def parse_complex(text) -> complex:
    """Read ``re,im``, ``a+bi``, ``a+bj`` or a bare real number."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip()
    if "," in s:
        re_, im_ = s.split(",", 1)
        try:
            return complex(float(re_), float(im_))
        except ValueError:
            raise UsageError(f"cannot parse complex number {text!r}") from None
    try:
        return complex(s.replace("i", "j").replace(" ", ""))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def parse_complex_list(text) -> list[complex]:
    if text is None:
        return None
    return [parse_complex(t) for t in str(text).split(";") if t.strip()]


def _tol_for(args, key: str) -> float:
    return args.tol if args.tol is not None else DEFAULT_TOLS[key]


# config handling ------------------------------------------------------------------

def _load_config(path: Optional[str], section: str) -> dict:
    if not path:
        return {}
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    out = {}
    for name in ("common", section):
        if cp.has_section(name):
            out.update({k.replace("-", "_"): v for k, v in cp.items(name)})
    return out


_TYPES = {"p": int, "l": int, "samples": int, "seed": int, "rows": int, "cols": int,
          "tol": float, "im_tau": float}


def _merge_config(args: argparse.Namespace, cfg: dict) -> argparse.Namespace:
    """File values fill in flags that were not given."""
    for key, raw in cfg.items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if getattr(args, key) is None:
            conv = _TYPES.get(key, str)
            try:
                setattr(args, key, conv(raw))
            except ValueError:
                raise UsageError(f"bad value {raw!r} for config key {key!r}") from None
    return args


def _fill_defaults(args, **defaults) -> None:
    for k, v in defaults.items():
        if getattr(args, k, None) is None:
            setattr(args, k, v)


# argument parser -------------------------------------------------------------------

def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="config file with a section per subcommand")
    sp.add_argument("--out", help="report path (default: $%s/<command>.<format> if set)" % OUTDIR_ENV)
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--tol", type=float, default=None, help="override every gate tolerance")


def _model(sp: argparse.ArgumentParser, fixed: bool = True) -> None:
    sp.add_argument("--family", choices=FAMILIES, default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--l", type=int, default=None)
    if fixed:
        sp.add_argument("--tau", default=None, help="modular parameter, re,im")
        sp.add_argument("--hbar", default=None)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="elliptic-rmatrix", description="Elliptic R-matrices and their checks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("identities", help="randomised elliptic function identities")
    _common(sp)
    sp.add_argument("--tau", default=None, help="fixed tau (default: sampled per tuple)")
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--only", default=None, help="comma-separated identity names")

    sp = sub.add_parser("build", help="print an R-matrix")
    _common(sp)
    _model(sp)
    sp.add_argument("--u", default=None, help="dynamical vector, 're,im;re,im;...'")
    sp.add_argument("--z", default=None)

    sp = sub.add_parser("verify", help="Yang-Baxter, unitarity, symmetry and classical checks")
    _common(sp)
    _model(sp, fixed=False)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--checks", default=None, help="comma-separated subset of " + ",".join(CHECKS))

    sp = sub.add_parser("limits", help="classical, trigonometric and rational limits")
    _common(sp)
    _model(sp, fixed=False)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--im-tau", dest="im_tau", type=float, default=None,
                    help="Im tau for the trigonometric comparison")

    sp = sub.add_parser("irf", help="star-triangle relation and partition functions")
    _common(sp)
    _model(sp)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--rows", type=int, default=None)
    sp.add_argument("--cols", type=int, default=None)
    sp.add_argument("--boundary", choices=("fixed", "periodic"), default=None)
    sp.add_argument("--z", default=None)

    sp = sub.add_parser("report", help="summarise or convert a saved report")
    sp.add_argument("path")
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    sp.add_argument("--out", default=None)
    return parser


# subcommands --------------------------------------------------------------------------

def _model_defaults(args, sampled: bool = False) -> None:
    if sampled:
        # sweeps draw tau and hbar per tuple
        args.tau = args.hbar = "sampled"
    _fill_defaults(args, family="intermediate", p=2, l=None, tau="0.1,1.1", hbar="0.11,-0.05",
                   samples=20, seed=0)
    if args.l is None:
        args.l = 1 if args.family == "felder" else 2
    if args.family == "vertex" and args.p != 1:
        args.p = 1


def _spec(args) -> RMatrixSpec:
    tau = parse_complex(args.tau) if args.family in ("vertex", "felder", "intermediate") else None
    return RMatrixSpec(args.family, args.p, args.l, tau, parse_complex(args.hbar))


def _guard_triple(args) -> None:
    if args.p * args.l > MAX_TRIPLE_N:
        raise ResourceGuardError(f"p*l = {args.p * args.l} exceeds {MAX_TRIPLE_N} for triple-tensor checks")


def _default_checks(family: str) -> list[str]:
    if family == "vertex":
        return ["qybe", "unitarity", "symmetries", "classical"]
    if family in ("trig", "rational"):
        return ["qdybe", "unitarity"]
    return ["qdybe", "unitarity", "symmetries", "classical"]


def cmd_identities(args, bundle: ReportBundle) -> None:
    _fill_defaults(args, samples=100, seed=0)
    names = None
    if args.only:
        names = [s.strip() for s in args.only.split(",") if s.strip()]
        bad = [n for n in names if n not in IDENTITIES]
        if bad:
            raise UsageError(f"unknown identities: {', '.join(bad)}")
    tau = None
    if args.tau is not None:
        tau = el.ModularParam(parse_complex(args.tau))
    for rep in identity_suite(tau, args.samples, _tol_for(args, "identities"), args.seed, names):
        bundle.add(rep)


def cmd_build(args, bundle: ReportBundle) -> dict:
    _model_defaults(args)
    _fill_defaults(args, z="0.21,0.17")
    spec = _spec(args)
    u = parse_complex_list(args.u) if args.u else [0.1 * (k + 1) + 0.05j * k for k in range(spec.p)]
    if spec.dynamical and len(u) != spec.p:
        raise UsageError(f"--u needs {spec.p} entries")
    op = build(spec, u if spec.dynamical else None, parse_complex(args.z))
    return {"family": spec.family, "p": spec.p, "l": spec.l, "factor_dims": list(op.factor_dims),
            "u": [encode_complex(x) for x in (u if spec.dynamical else [])],
            "z": encode_complex(parse_complex(args.z)), "hbar": encode_complex(spec.hbar),
            "tau": encode_complex(spec.tau.tau) if spec.tau is not None else None,
            "entries": [[encode_complex(x) for x in row] for row in np.asarray(op)]}


def cmd_verify(args, bundle: ReportBundle) -> None:
    _model_defaults(args, sampled=True)
    checks = ([c.strip() for c in args.checks.split(",") if c.strip()] if args.checks
              else _default_checks(args.family))
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise UsageError(f"unknown checks: {', '.join(bad)}")
    if any(c in ("qybe", "qdybe", "classical") for c in checks):
        _guard_triple(args)
    RMatrixSpec(args.family, args.p, args.l, 1j)  # validates p, l against the family
    for c in checks:
        kw = {}
        if c == "qybe" and args.family != "vertex":
            raise UsageError("qybe applies to the vertex family; use qdybe")
        if c == "qdybe" and args.family == "vertex":
            raise UsageError("qdybe applies to dynamical families; use qybe")
        if c == "symmetries" and args.family in ("trig", "rational"):
            raise UsageError("symmetries need an elliptic family")
        if c == "classical":
            if args.family in ("trig", "rational"):
                raise UsageError("classical checks need an elliptic family")
            kw["source"] = "numeric" if args.family == "intermediate" else "closed"
            tol = _tol_for(args, "cybe" if args.family == "vertex" else "classical")
        else:
            tol = _tol_for(args, c)
        bundle.add(verifier.sweep(c, args.family, args.p, args.l, args.samples, args.seed, tol, **kw))


def cmd_limits(args, bundle: ReportBundle) -> None:
    _model_defaults(args, sampled=True)
    _fill_defaults(args, im_tau=15.0)
    rng = np.random.default_rng(args.seed)
    p, l, fam = args.p, args.l, args.family
    reps = {"classical_match": [], "trig_limit": [], "rational_limit": [], "degeneration": []}
    for _ in range(args.samples):
        spec, u, z, w = verifier.draw_sample(rng, "intermediate" if fam in ("trig", "rational") else fam, p, l)
        hbar = spec.hbar
        if fam in ("vertex", "felder"):
            reps["classical_match"].append(verifier.check_classical_match(
                spec.with_(hbar=0.1), u, z, _tol_for(args, "classical_match")))
            kind, N = fam, p * l
            reps["degeneration"].append(verifier.check_degeneration(
                kind, N, u if fam == "felder" else None, z, hbar, spec.tau, _tol_for(args, "degeneration")))
        if fam != "vertex" and fam != "felder":
            # real parts in (-1/2, 1/2) keep the trigonometric functions off their poles
            uu = [complex((x.real + 0.5) % 1 - 0.5, x.imag) for x in u]
            reps["trig_limit"].append(verifier.check_trig_limit(
                p, l, uu, z, hbar, args.im_tau, 0.0, _tol_for(args, "trig_limit")))
            reps["rational_limit"].append(verifier.check_rational_limit(
                p, l, uu, z, hbar, _tol_for(args, "rational_limit")))
    for key, rs in reps.items():
        if rs:
            bundle.add(_merge(f"{key}[{fam} p={p} l={l}]", rs, rs[0].tol, args.seed))


def _merge(name, reps, tol, seed) -> ResidualReport:
    from .report import merge

    return merge(name, reps, tol, seed=seed)


def cmd_irf(args, bundle: ReportBundle) -> None:
    _fill_defaults(args, family="felder", p=2, samples=50, seed=0, rows=2, cols=2,
                   boundary="fixed", z="0.21,0.1", tau="0.1,1.1", hbar="0.13,0.02")
    if args.l is None:
        args.l = 1 if args.family == "felder" else 2
    if args.p < 2:
        raise UsageError("IRF models need p >= 2")
    bundle.add(irf.star_triangle_sweep(args.family, args.p, args.l, args.samples, args.seed,
                                       _tol_for(args, "star_triangle")))
    if args.l == 1:
        spec = _spec(args)
        z = parse_complex(args.z)
        Z1 = irf.partition_function(args.rows, args.cols, args.boundary, z, spec)
        Z2 = irf.partition_function_transfer(args.rows, args.cols, args.boundary, z, spec)
        res = abs(Z1 - Z2) / max(abs(Z1), abs(Z2), 1e-300)
        bundle.add(ResidualReport(
            "partition_function", res, _tol_for(args, "partition"), scale=Z1, seed=args.seed,
            params={"family": spec.family, "p": spec.p, "rows": args.rows, "cols": args.cols,
                    "boundary": args.boundary, "z": z, "tau": parse_complex(args.tau),
                    "hbar": spec.hbar},
            extra={"Z_enumeration": Z1, "Z_transfer": Z2,
                   "vacuous": Z1 == 0 and Z2 == 0}))


def cmd_report(args) -> int:
    path = Path(args.path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        bundle = (ReportBundle.from_csv(text) if text.startswith("# ")
                  else ReportBundle.from_json(text))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse report {path}: {exc}") from None
    for r in bundle.results:
        print(r.summary())
    if args.format or args.out:
        fmt = args.format or ("csv" if str(args.out).endswith(".csv") else "json")
        out = bundle.to_csv() if fmt == "csv" else bundle.to_json()
        if args.out:
            Path(args.out).write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
    return EXIT_OK if bundle.passed else EXIT_FAIL


# driver -----------------------------------------------------------------------------------

def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("config",)}


def _conventions() -> dict:
    return {fam: verifier.CANONICAL.as_dict() for fam in ("felder", "intermediate", "trig", "rational")}


def _output_path(args) -> Optional[Path]:
    fmt = args.format or "json"
    if args.out:
        return Path(args.out)
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir:
        return Path(outdir) / f"{args.command}.{fmt}"
    return None


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the exit code (never calls ``sys.exit``)."""
    parser = make_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "report":
            return cmd_report(args)
        _merge_config(args, _load_config(args.config, args.command))
        header = {"version": __version__, "seed": args.seed,
                  "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
                  "command": args.command, "conventions": _conventions()}
        bundle = ReportBundle(header=header)
        t0 = time.perf_counter()
        if args.command == "build":
            out = cmd_build(args, bundle)
            text = json.dumps(out, indent=2) + "\n"
            path = _output_path(args)
            if path:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text, encoding="utf-8")
                print(f"wrote {path}")
            else:
                sys.stdout.write(text)
            return EXIT_OK
        {"identities": cmd_identities, "verify": cmd_verify,
         "limits": cmd_limits, "irf": cmd_irf}[args.command](args, bundle)
        bundle.header["seed"] = args.seed
        # run-dependent values stay in the header so results are reproducible
        bundle.header["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
        bundle.config = _echo(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (DomainError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    for r in bundle.results:
        print(r.summary())
    ok = bundle.passed and bool(bundle.results)
    fmt = args.format or "json"
    path = _output_path(args)
    if path is None and not ok:
        # a failing run always leaves a report behind
        fd, name = tempfile.mkstemp(prefix=f"elliptic-rmatrix-{args.command}-", suffix="." + fmt)
        os.close(fd)
        path = Path(name)
    if path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(bundle.to_csv() if fmt == "csv" else bundle.to_json(), encoding="utf-8")
        print(f"report: {path}")
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())
