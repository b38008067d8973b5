"""Command-line experiment runner.

Subcommands ``simulate``, ``analytic``, ``oracle`` and ``verify`` read a TOML
experiment file; ``report`` pretty-prints a JSON file written by any of them.
Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import analytic as an
from . import oracle as orc
from .config import SCHEMA_VERSION, ConfigError, ExperimentConfig, StatisticDef, load_config
from .records import Record, dumps, to_jsonable
from .rng_ensemble import SubmatrixSpec
from .spectra import CovarianceReport, estimate_moments

__all__ = [
    "VERIFY_COLUMNS",
    "VerificationRow",
    "run_simulate",
    "run_verify",
    "run_analytic",
    "run_oracle",
    "main",
    "EXIT_OK",
    "EXIT_FAIL",
    "EXIT_CONFIG",
]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

VERIFY_COLUMNS = ("statistic_i", "statistic_j", "mc_cov", "mc_se", "analytic_cov", "oracle_cov", "z", "pass")

AnalyticHook = Callable[[str, str, float], float]


@dataclass(frozen=True)
class VerificationRow:
    statistic_i: str
    statistic_j: str
    mc_cov: float
    mc_se: float
    analytic_cov: float
    oracle_cov: float | None
    z: float
    passed: bool
    L: int

    def csv_values(self) -> list:
        return [self.statistic_i, self.statistic_j, repr(self.mc_cov), repr(self.mc_se),
                repr(self.analytic_cov), "" if self.oracle_cov is None else repr(self.oracle_cov),
                repr(self.z), "true" if self.passed else "false"]

    def to_dict(self) -> dict:
        out = dict(zip(VERIFY_COLUMNS, [self.statistic_i, self.statistic_j, self.mc_cov, self.mc_se,
                                        self.analytic_cov, self.oracle_cov, self.z, self.passed]))
        out["L"] = self.L
        return to_jsonable(out)


def z_score(mc: float, reference: float, se: float) -> float:
    diff = mc - reference
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


# --------------------------------------------------------------------------- simulate


def _simulate_one(cfg: ExperimentConfig, L: int) -> CovarianceReport:
    defs = cfg.statistics
    return estimate_moments([d.build() for d in defs], cfg.handle, cfg.sim_geometry(L), cfg.replicates,
                            B=cfg.batches, labels=[d.label for d in defs])


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def simulate_payload(cfg: ExperimentConfig, L: int, report: CovarianceReport) -> dict:
    return {"schema_version": SCHEMA_VERSION, "L": L, **report.to_dict(), "config": cfg.raw}


def run_simulate(cfg: ExperimentConfig, write: bool = True) -> dict[int, CovarianceReport]:
    """Monte Carlo reports for every ``L`` of the schedule (JSON and CSV per ``L``)."""
    out = {}
    for L in cfg.L_schedule:
        report = _simulate_one(cfg, L)
        out[L] = report
        if write:
            base = Path(cfg.output_dir) / f"simulate_L{L}"
            _write(base.with_suffix(".json"), dumps(simulate_payload(cfg, L, report)))
            report.to_csv(base.with_suffix(".csv"))
    return out


# --------------------------------------------------------------------------- verify


def analytic_pair(cfg: ExperimentConfig, a: StatisticDef, b: StatisticDef, L: int | None) -> float:
    """Limiting covariance of two configured statistics (realized shapes when ``L`` is given)."""
    weights = cfg.weights
    total = 0.0
    for ka, wa in a.rho:
        for kb, wb in b.rho:
            geom = cfg.pair_geometry(ka, kb, L)
            total += wa * wb * an.polynomial_covariance(list(a.coeffs), list(b.coeffs), geom, weights)
    return total


def oracle_pair(cfg: ExperimentConfig, a: StatisticDef, b: StatisticDef, L: int) -> float | None:
    """Exact finite-size covariance, or ``None`` when the enumeration budget is exceeded."""
    total = 0.0
    try:
        for ka, wa in a.rho:
            for kb, wb in b.rho:
                s1, s2 = cfg.block_spec(ka, L), cfg.block_spec(kb, L)
                for k, ca in enumerate(a.coeffs):
                    for l, cb in enumerate(b.coeffs):
                        if k == 0 or l == 0 or ca == 0 or cb == 0:
                            continue
                        total += wa * wb * ca * cb * orc.exact_trace_covariance(
                            k, l, s1, s2, L, cfg.distribution)
    except ValueError:
        return None
    return total


def verification_rows(cfg: ExperimentConfig, L: int, report: CovarianceReport,
                      analytic_hook: AnalyticHook | None = None) -> list[VerificationRow]:
    defs = cfg.statistics
    rows = []
    for i in range(len(defs)):
        for j in range(i, len(defs)):
            a, b = defs[i], defs[j]
            value = analytic_pair(cfg, a, b, L)
            if analytic_hook is not None:
                value = float(analytic_hook(a.label, b.label, value))
            oracle_value = oracle_pair(cfg, a, b, L) if cfg.use_oracle else None
            reference = oracle_value if cfg.reference == "oracle" and oracle_value is not None else value
            mc, se = float(report.cov[i, j]), float(report.se_cov[i, j])
            z = z_score(mc, reference, se)
            rows.append(VerificationRow(a.label, b.label, mc, se, float(value),
                                        None if oracle_value is None else float(oracle_value), float(z),
                                        bool(abs(z) <= cfg.threshold), L))
    return rows


def verify_csv(rows: Sequence[VerificationRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VERIFY_COLUMNS)
    for r in rows:
        w.writerow(r.csv_values())
    return buf.getvalue()


def run_verify(cfg: ExperimentConfig, analytic_hook: AnalyticHook | None = None,
               write: bool = True) -> tuple[list[VerificationRow], bool]:
    """Compare Monte Carlo covariances with analytic (and oracle) values.

    ``analytic_hook(label_i, label_j, value)`` may replace analytic values;
    it exists so tests can inject a wrong reference.
    """
    rows = []
    for L, report in run_simulate(cfg, write=False).items():
        block = verification_rows(cfg, L, report, analytic_hook)
        rows.extend(block)
        if write:
            _write(Path(cfg.output_dir) / f"verify_L{L}.csv", verify_csv(block))
    passed = all(r.passed for r in rows)
    if write:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "seed": cfg.seed,
            "threshold": cfg.threshold,
            "passed": passed,
            "rows": [r.to_dict() for r in rows],
            "config": cfg.raw,
        }
        _write(Path(cfg.output_dir) / "verify.json", dumps(payload))
    return rows, passed


# --------------------------------------------------------------------------- analytic


def _geometry_from(d: dict) -> an.OverlapGeometry:
    keys = ("mu1", "nu1", "mu2", "nu2", "mu12", "nu12")
    missing = [k for k in keys if k not in d]
    if missing:
        raise ConfigError(f"geometry is missing {', '.join(missing)}")
    return an.OverlapGeometry(*(float(d[k]) for k in keys))


def _poly(req: dict, name: str, deg: str):
    if name in req:
        return [float(c) for c in req[name]]
    if deg in req:
        return int(req[deg])
    raise ConfigError(f"request needs {deg} or {name}")


def _omega_roundtrip(mu: float, nu: float, grid: int) -> float:
    """Max error of bulk -> half-plane -> bulk over a grid spanning each slice edge to edge."""
    err = 0.0
    half = 2.0 * math.sqrt(mu * nu)
    for y in np.linspace(0.05, 2.0, grid):
        for t in np.linspace(-1.0, 1.0, grid):
            x = y * (mu + nu) + t * y * half
            x2, y2 = an.omega_inverse(an.omega_forward(x, y, mu, nu), mu, nu)
            err = max(err, abs(x2 - x), abs(y2 - y))
    return err


def analytic_request(req: dict, cfg: ExperimentConfig) -> Record:
    formula = req.get("formula")
    weights = cfg.weights
    if formula == "covariance":
        geom = _geometry_from(req.get("geometry", {}))
        method = req.get("method", "modes")
        p, q = _poly(req, "p", "k"), _poly(req, "q", "l")
        evaluators = {
            "modes": an.covariance_modes,
            "quadrature": lambda k, l, g, w: an.covariance_quadrature(k, l, g, w),
            "t1_t2": lambda k, l, g, w: an.t1_limit(k, l, g, w.fourth_moment) + an.t2_limit(k, l, g, w),
        }
        if method not in evaluators:
            raise ConfigError(f"unknown covariance method {method!r}")
        value = an.polynomial_covariance(p, q, geom, weights, evaluators[method])
        tol = {"modes": 1e-12, "quadrature": 1e-6, "t1_t2": 1e-10}[method]
        return Record(formula, {"p": p, "q": q, "geometry": req["geometry"],
                                "distribution": cfg.distribution.kind.value}, value, method, tol)
    if formula == "planar_covariance":
        value = an.planar_covariance(_poly(req, "p", "k"), _poly(req, "q", "l"), req["rho_i"], req["rho_j"],
                                     float(req["mu"]), float(req["nu"]), weights)
        return Record(formula, req, value, "modes", 1e-12)
    if formula == "narayana_table":
        gamma = float(req.get("gamma", 1.0))
        k_max = int(req.get("k_max", 8))
        table = [[an.narayana_odd(k, gamma), an.narayana_even(k, gamma)] for k in range(k_max + 1)]
        return Record(formula, {"k_max": k_max, "gamma": gamma}, table, "closed_form", 1e-12)
    if formula == "gen_F":
        gamma = float(req.get("gamma", 1.0))
        order = int(req.get("order", 12))
        return Record(formula, {"gamma": gamma, "order": order}, an.gen_F(gamma, order), "series", 1e-9)
    if formula == "limit_mean":
        value = an.limit_mean(int(req["k"]), float(req["mu"]), float(req["nu"]))
        return Record(formula, req, value, "narayana_sum", 1e-12)
    if formula == "omega_roundtrip":
        mu, nu, grid = float(req.get("mu", 1.0)), float(req.get("nu", 1.0)), int(req.get("grid", 40))
        return Record(formula, {"mu": mu, "nu": nu, "grid": grid}, _omega_roundtrip(mu, nu, grid),
                      "max_abs_error", 1e-12)
    if formula == "mp_mass":
        from scipy import integrate

        mu, nu = float(req["mu"]), float(req["nu"])
        lo, hi = (math.sqrt(mu) - math.sqrt(nu)) ** 2, (math.sqrt(mu) + math.sqrt(nu)) ** 2
        value = integrate.quad(lambda x: an.mp_density(x, mu, nu), lo, hi, limit=200)[0]
        return Record(formula, {"mu": mu, "nu": nu}, value, "quad", 1e-8)
    raise ConfigError(f"unknown analytic formula {formula!r}")


def run_analytic(cfg: ExperimentConfig, write: bool = True) -> list[Record]:
    """Configured analytic requests, followed by the limit covariance of every statistic pair."""
    records = []
    try:
        for req in cfg.raw.get("analytic", {}).get("requests", []):
            records.append(analytic_request(req, cfg))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"analytic request: {exc}") from exc
    defs = cfg.statistics
    for i in range(len(defs)):
        for j in range(i, len(defs)):
            value = analytic_pair(cfg, defs[i], defs[j], None)
            records.append(Record("statistic_covariance", {"statistic_i": defs[i].label,
                                                           "statistic_j": defs[j].label}, value, "modes", 1e-12))
    if write:
        _write(Path(cfg.output_dir) / "analytic.json", dumps(_records_payload(cfg, records)))
    return records


def _records_payload(cfg, records):
    return {"schema_version": SCHEMA_VERSION, "seed": cfg.seed,
            "records": [r.to_dict() for r in records], "config": cfg.raw}


# --------------------------------------------------------------------------- oracle


def _spec_from(d: dict) -> SubmatrixSpec:
    return SubmatrixSpec(tuple(int(v) for v in d["rows"]), tuple(int(v) for v in d["cols"]))


def oracle_request(req: dict, cfg: ExperimentConfig) -> Record:
    formula = req.get("formula")
    dist = cfg.distribution
    if formula == "trace_moment":
        k, m, n, L = (int(req[x]) for x in ("k", "m", "n", "L"))
        value = orc.exact_trace_moment(k, m, n, L, dist)
        return Record(formula, {"k": k, "m": m, "n": n, "L": L, "distribution": dist.kind.value},
                      value, "tuple_sum", 0.0)
    if formula == "trace_covariance":
        k, l, L = int(req["k"]), int(req["l"]), int(req["L"])
        value = orc.exact_trace_covariance(k, l, _spec_from(req["spec1"]), _spec_from(req["spec2"]), L, dist)
        return Record(formula, {**req, "distribution": dist.kind.value}, value, "tuple_sum", 0.0)
    if formula == "narayana_trees":
        k, gamma = int(req["k"]), float(req.get("gamma", 1.0))
        odd, even = orc.narayana_from_trees(k, gamma)
        return Record(formula, {"k": k, "gamma": gamma}, [odd, even], "tree_enumeration", 0.0)
    raise ConfigError(f"unknown oracle formula {formula!r}")


def run_oracle(cfg: ExperimentConfig, write: bool = True) -> list[Record]:
    records = []
    try:
        for req in cfg.raw.get("oracle", {}).get("requests", []):
            records.append(oracle_request(req, cfg))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"oracle request: {exc}") from exc
    if write:
        _write(Path(cfg.output_dir) / "oracle.json", dumps(_records_payload(cfg, records)))
    return records


# --------------------------------------------------------------------------- report


def format_report(payload: dict) -> str:
    lines = []
    if "rows" in payload:
        lines.append(f"verification (seed {payload.get('seed')}, threshold {payload.get('threshold')}): "
                     f"{'PASS' if payload.get('passed') else 'FAIL'}")
        lines.append(f"{'L':>5}  {'pair':<24} {'mc':>12} {'se':>10} {'analytic':>12} {'oracle':>12} {'z':>8}")
        for r in payload["rows"]:
            oracle_value = "" if r["oracle_cov"] is None else f"{r['oracle_cov']:.6g}"
            pair = f"{r['statistic_i']},{r['statistic_j']}"
            lines.append(f"{r['L']:>5}  {pair:<24} {r['mc_cov']:>12.6g} {r['mc_se']:>10.3g} "
                         f"{r['analytic_cov']:>12.6g} {oracle_value:>12} {float(r['z']):>8.2f}"
                         f"  {'ok' if r['pass'] else 'FAIL'}")
    elif "records" in payload:
        for r in payload["records"]:
            lines.append(f"{r['formula']:<22} {r['method']:<16} {json.dumps(r['inputs'])} -> {json.dumps(r['value'])}")
    elif "cov" in payload:
        lines.append(f"simulation at L={payload.get('L')} (R={payload['R']}, B={payload['B']}, seed {payload['seed']})")
        labels = payload["labels"]
        for i, a in enumerate(labels):
            lines.append(f"  {a:<20} mean {payload['mean'][i]:.6g} +- {payload['se_mean'][i]:.2g}"
                         f"  var {payload['cov'][i][i]:.6g} +- {payload['se_cov'][i][i]:.2g}")
    else:
        raise ValueError("unrecognized result file")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- entry point


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wishart-gff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [("simulate", "Monte Carlo moments and cumulants"),
                            ("analytic", "evaluate limit formulas"),
                            ("oracle", "exact finite-size values"),
                            ("verify", "Monte Carlo versus analytic z-score table")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="TOML experiment file")
        p.add_argument("--seed", type=int)
        p.add_argument("--replicates", type=int)
        p.add_argument("--batches", type=int)
        p.add_argument("--L", type=_int_list, dest="L", help="comma-separated sizes")
        p.add_argument("--threshold", type=float)
        p.add_argument("--out", help="output directory")
    p = sub.add_parser("report", help="summarize a JSON result file")
    p.add_argument("path")
    return parser


def main(argv: Sequence[str] | None = None, analytic_hook: AnalyticHook | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        try:
            payload = json.loads(Path(args.path).read_text())
            sys.stdout.write(format_report(payload))
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed, replicates=args.replicates, batches=args.batches, L=args.L,
            threshold=args.threshold, out=args.out)
        if args.command == "simulate":
            reports = run_simulate(cfg)
            for L, rep in reports.items():
                sys.stdout.write(format_report(simulate_payload(cfg, L, rep)))
            return EXIT_OK
        if args.command == "analytic":
            records = run_analytic(cfg)
            sys.stdout.write(format_report({"records": [r.to_dict() for r in records]}))
            return EXIT_OK
        if args.command == "oracle":
            records = run_oracle(cfg)
            sys.stdout.write(format_report({"records": [r.to_dict() for r in records]}))
            return EXIT_OK
        rows, passed = run_verify(cfg, analytic_hook=analytic_hook)
        sys.stdout.write(format_report({"rows": [r.to_dict() for r in rows], "seed": cfg.seed,
                                        "threshold": cfg.threshold, "passed": passed}))
        return EXIT_OK if passed else EXIT_FAIL
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
