"""Command-line front end.

Subcommands:
  run           full pipeline: chi samples, distribution, cumulants, norms,
                consistency checks, optional scans; one JSON document out.
  oracle-check  engine vs. Fock-space brute force, side by side.
  scan          one named scan to a CSV table.

Exit codes: 0 success, 2 configuration or contract violation, 3 numerical
integrity failure.  Numeric payloads are deterministic for a fixed config
and version; wall-clock timings live in their own section.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, diagnostics, fcs, fock
from .config import ScenarioConfig, load_config
from .errors import ConfigError, ContractError, NumericalIntegrityError
from .models import Scenario

ORACLE_MODE_LIMIT = 14
ORACLE_DEVIATION_GATE = 1e-9


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _complex_table(values: np.ndarray) -> dict:
    return {"real": [float(v.real) for v in values],
            "imag": [float(v.imag) for v in values]}


class _Stopwatch:
    def __init__(self):
        self.laps: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.laps[name] = now - self._t0
        self._t0 = now


def _scan_result_rows(result: diagnostics.ScanResult) -> list[dict]:
    rows = []
    for i, value in enumerate(result.values):
        row = {"parameter": float(value),
               "kappa": [float(k) for k in result.cumulants[i].kappa]}
        row.update(result.norms[i].as_dict())
        rows.append(row)
    return rows


def _run_scan(cfg: ScenarioConfig, name: str) -> dict:
    spec = cfg.scans[name]
    if name == "length":
        result = diagnostics.tenet_scan_length(
            cfg.lattice, cfg.state, spec["total_time"], spec["lengths"],
            variant=cfg.variant, lambda_ref=cfg.lambda_ref)
        return {"kind": "length", "rows": _scan_result_rows(result)}
    if name == "depth":
        if cfg.model_kind == "chiral":
            result = diagnostics.tenet_scan_depth(
                cfg.chiral, spec["factors"], variant=cfg.variant,
                lambda_ref=cfg.lambda_ref)
        else:
            result = diagnostics.tenet_scan_depth(
                cfg.lattice, spec["mus"], total_time=spec["total_time"],
                variant=cfg.variant, lambda_ref=cfg.lambda_ref)
        return {"kind": "depth", "rows": _scan_result_rows(result)}
    if name == "variance":
        fit = diagnostics.variance_vs_length(
            cfg.lattice, spec["beta"], spec["lengths"], mu=spec["mu"])
        return {"kind": "variance",
                "rows": [{"parameter": float(l), "variance": float(v)}
                         for l, v in zip(fit.lengths, fit.variances)],
                "fit": {"slope": fit.slope, "intercept": fit.intercept,
                        "r_squared": fit.r_squared}}
    raise ConfigError(f"scan: unknown scan name {name!r}")


def _scan_csv_lines(table: dict) -> list[str]:
    rows = table["rows"]
    if table["kind"] == "variance":
        lines = ["parameter,variance"]
        lines += [f"{_fmt(r['parameter'])},{_fmt(r['variance'])}" for r in rows]
        return lines
    norm_labels = [k for k in rows[0] if k not in ("parameter", "kappa")]
    order = len(rows[0]["kappa"])
    header = ["parameter"] + [f"kappa{i + 1}" for i in range(order)] + norm_labels
    lines = [",".join(header)]
    for r in rows:
        cells = [_fmt(r["parameter"])]
        cells += [_fmt(k) for k in r["kappa"]]
        cells += [_fmt(r[label]) for label in norm_labels]
        lines.append(",".join(cells))
    return lines


def build_document(cfg: ScenarioConfig, threads: int = 1,
                   seed: int | None = None) -> dict:
    """Run the full pipeline for one scenario and assemble the result document."""
    watch = _Stopwatch()
    scenario = cfg.build()
    watch.lap("build")

    grid = cfg.grid_for(scenario)
    samples = fcs.generating_function(scenario, cfg.variant, grid, threads=threads)
    watch.lap("sample")

    dist = fcs.charge_distribution(samples)
    kappa = fcs.cumulants(dist, cfg.cumulant_order)
    watch.lap("distribution")

    report = diagnostics.norm_report(scenario, cfg.lambda_ref)
    mean_direct = fcs.mean_transport_direct(scenario.occupation, scenario.charge,
                                            scenario.evolution)
    mean_naive = fcs.naive_mean(scenario.occupation, scenario.charge,
                                scenario.evolution)
    other_variant = "naive" if cfg.variant != "naive" else "regularized"
    other = fcs.generating_function(scenario, other_variant, grid, threads=threads)
    variant_dev = float(np.max(np.abs(samples.values - other.values)
                               / (1.0 + np.abs(samples.values))))
    checks = {
        "variant_agreement_max": variant_dev,
        "mean_direct": mean_direct,
        "mean_naive": mean_naive,
        "kappa1_vs_mean_direct": abs(kappa[1] - mean_direct),
    }
    if scenario.occupation.kind == "pure":
        checks["particle_hole_max"] = fcs.particle_hole_check(scenario, grid,
                                                              cfg.variant)
    watch.lap("checks")

    scans = {name: _run_scan(cfg, name) for name in sorted(cfg.scans)}
    if scans:
        watch.lap("scans")

    doc = {
        "tool": {"name": "fcstat", "version": __version__},
        "config": cfg.raw,
        "seed": seed,
        "results": {
            "scenario": {"label": scenario.label, "dimension": scenario.dim,
                         "occupation_kind": scenario.occupation.kind},
            "chi": {"variant": cfg.variant, "grid_size": grid,
                    **_complex_table(samples.values)},
            "distribution": {"n_min": dist.n_min,
                             "probabilities": [float(p) for p in dist.probabilities],
                             "raw": [float(p) for p in dist.raw]},
            "cumulants": [float(k) for k in kappa.kappa],
            "norms": {"lambda_ref": report.lambda_ref, **report.as_dict()},
            "checks": checks,
        },
        "scans": scans,
        "timings": watch.laps,
    }
    return doc


def numeric_payload(doc: dict) -> str:
    """The deterministic part of a document, serialised canonically."""
    body = {k: v for k, v in doc.items() if k != "timings"}
    return json.dumps(body, indent=2, sort_keys=True)


def run_oracle_check(cfg: ScenarioConfig, threads: int = 1) -> dict:
    """Engine vs. brute force; only feasible up to the oracle's mode limit."""
    scenario = cfg.build()
    if scenario.dim > ORACLE_MODE_LIMIT:
        raise ConfigError(
            f"oracle-check: one-particle dimension {scenario.dim} exceeds the "
            f"{ORACLE_MODE_LIMIT}-mode brute-force gate")
    grid = cfg.grid_for(scenario)
    samples = fcs.generating_function(scenario, cfg.variant, grid, threads=threads)
    dist = fcs.charge_distribution(samples)

    basis = fock.FockBasis(scenario.dim)
    state = fock.state_from_occupation(scenario.occupation.matrix, basis)
    oracle = fock.FockOracle(scenario.evolution, scenario.charge.matrix,
                             state, basis)
    chi_dev = float(np.max(np.abs(samples.values - oracle.chi_samples(grid))))
    odist = oracle.distribution()
    engine_p = dict(zip(dist.charges.tolist(), dist.raw.tolist()))
    oracle_p = dict(zip(odist.charges.tolist(), odist.raw.tolist()))
    p_dev = max(abs(engine_p.get(n, 0.0) - oracle_p.get(n, 0.0))
                for n in set(engine_p) | set(oracle_p))
    return {
        "tool": {"name": "fcstat", "version": __version__},
        "config": cfg.raw,
        "grid_size": grid,
        "max_chi_deviation": chi_dev,
        "max_probability_deviation": p_dev,
        "gate": ORACLE_DEVIATION_GATE,
        "passed": bool(chi_dev <= ORACLE_DEVIATION_GATE
                       and p_dev <= ORACLE_DEVIATION_GATE),
    }


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcstat",
        description="Charge-transfer counting statistics for free fermions")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON scenario config")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for the lambda grid")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized self-tests")

    common(sub.add_parser("run", help="full pipeline to a JSON document"))
    common(sub.add_parser("oracle-check",
                          help="cross-validate against the Fock-space brute force"))
    scan = sub.add_parser("scan", help="run one named scan to CSV")
    common(scan)
    scan.add_argument("name", help="scan name from analysis.scans")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("threads: must be >= 1")
        if args.command == "run":
            doc = build_document(cfg, threads=args.threads, seed=args.seed)
            payload = numeric_payload(doc)
            doc_text = json.dumps(doc, indent=2, sort_keys=True)
            _write_text(args.out, doc_text)
            if args.out not in (None, "-"):
                Path(args.out).with_suffix(".payload.json").write_text(payload + "\n")
            return 0
        if args.command == "oracle-check":
            report = run_oracle_check(cfg, threads=args.threads)
            _write_text(args.out, json.dumps(report, indent=2, sort_keys=True))
            if not report["passed"]:
                raise NumericalIntegrityError(
                    f"oracle deviation beyond {ORACLE_DEVIATION_GATE:.0e}: "
                    f"chi {report['max_chi_deviation']:.3e}, "
                    f"p {report['max_probability_deviation']:.3e}")
            return 0
        if args.command == "scan":
            if args.name not in cfg.scans:
                raise ConfigError(
                    f"scan: name {args.name!r} not configured; available: "
                    f"{sorted(cfg.scans)}")
            table = _run_scan(cfg, args.name)
            _write_text(args.out, "\n".join(_scan_csv_lines(table)))
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalIntegrityError as exc:
        print(f"numerical integrity error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
