"""Command-line front end.

Usage::

    kahler-decoherence --config run.json --out results/
    echo '{"command": "check", "rates": [1, 2, 3]}' | kahler-decoherence --stdin

Exit codes: 0 success / affirmative verdict, 1 negative verdict,
2 configuration or runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import cp1_geometry as geo
from .config import RunConfig, parse_config
from .deformed_laplacian import is_elliptic
from .divisibility import Divisibility, classify_schedule
from .errors import DecoherenceError, ValidationError
from .harmonics import HarmonicField, synthesize
from .pauli_channel import (
    Admissibility,
    DecoherenceRates,
    DensityMatrix,
    bloch_from_density,
    density_from_bloch,
    evolve_bloch_closed_form,
    integrate_master_equation,
    rates_admissible,
)
from .quadrature import quadrature_rule
from .spectral_evolution import evolve_constant, evolve_schedule, find_negativity

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int)) and not isinstance(v, bool) else fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _initial_density(cfg: RunConfig) -> DensityMatrix:
    if cfg.bloch is not None:
        return density_from_bloch(cfg.bloch)
    return DensityMatrix(np.array(cfg.density, dtype=complex))


def read_harmonics_csv(path: str | Path, l_max: int) -> HarmonicField:
    """Read a ``l,m,re,im`` coefficient table (missing entries are zero)."""
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"l", "m", "re", "im"} <= set(reader.fieldnames):
            raise ValidationError("harmonics_file", "expected columns l,m,re,im")
        for row in reader:
            l, m = int(row["l"]), int(row["m"])
            if l > l_max:
                raise ValidationError("harmonics_file", f"degree {l} exceeds l_max={l_max}")
            entries[(l, m)] = complex(float(row["re"]), float(row["im"]))
    hf = HarmonicField.from_dict(l_max, entries)
    if hf.reality_defect() > 1e-12:
        raise ValidationError("harmonics_file", "coefficients do not describe a real function")
    return hf


def _harmonic_rows(times, trajectory):
    for t, hf in zip(times, trajectory):
        for l in range(hf.l_max + 1):
            for m in range(-l, l + 1):
                a = hf.coefficient(l, m)
                yield (t, l, m, a.real, a.imag)


def _all_cp(cfg: RunConfig) -> bool:
    return all(rates_admissible(DecoherenceRates.from_array(g)) is Admissibility.COMPLETELY_POSITIVE
               for g in _rate_samples(cfg))


def _rate_samples(cfg: RunConfig):
    if cfg.schedule is not None:
        return [g for _, g in cfg.schedule]
    return [cfg.rates]


def cmd_evolve_density(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    rho0 = _initial_density(cfg)
    times = cfg.t_grid.times()
    schedule = cfg.rates_schedule()
    H = cfg.hamiltonian_spec()
    traj = integrate_master_equation(rho0, schedule, H, times, cfg.step)
    numeric = traj.bloch()
    report = {"command": cfg.command, "integrator_step": cfg.step,
              "max_trace_drift": float(np.max(np.abs(traj.trace_drift)))}
    if schedule.is_constant and H.is_zero():
        rates = schedule.at(0.0)
        x0 = bloch_from_density(rho0)
        closed = np.array([evolve_bloch_closed_form(x0, rates, t).array for t in times])
        report["source"] = "closed-form"
        report["max_deviation"] = float(np.max(np.abs(closed - numeric)))
        report["admissibility"] = rates_admissible(rates).value
    else:
        closed = numeric
        report["source"] = "integrator"
        report["max_deviation"] = None
    header = ["t", "x1", "x2", "x3"]
    _write_csv(out / "bloch.csv", header, ([t, *x] for t, x in zip(times, closed)))
    _write_csv(out / "bloch_integrated.csv", header, ([t, *x] for t, x in zip(times, numeric)))
    _write_json(out / "report.json", report)
    return EXIT_OK, report


def cmd_evolve_distribution(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    if cfg.harmonics_file is not None:
        hf = read_harmonics_csv(cfg.harmonics_file, cfg.l_max)
    else:
        hf = geo.distribution_from_density(_initial_density(cfg)).to_harmonic(cfg.l_max)
    times = cfg.t_grid.times()
    rule = quadrature_rule(cfg.n_theta, cfg.n_phi)
    schedule = cfg.rates_schedule()
    H = cfg.hamiltonian_spec()
    if schedule.is_constant and H.is_zero():
        rep = evolve_constant(hf, schedule.at(0.0), times, rule, cfg.tol)
        method = "exact-block-exponential"
    else:
        rep = evolve_schedule(hf, schedule, times, cfg.step, rule, cfg.tol, H=H)
        method = "rk4"
    _write_csv(out / "harmonics.csv", ["t", "l", "m", "re", "im"], _harmonic_rows(times, rep.trajectory))
    _write_csv(out / "summary.csv", ["t", "min_value", "normalization"],
               zip(times, rep.min_values, rep.normalizations))
    th, ph = rule.mesh()
    for i in cfg.grid_times:
        vals = synthesize(rep.trajectory[i], rule).values
        _write_csv(out / f"grid_{i}.csv", ["theta", "phi", "value"],
                   zip(th.ravel(), ph.ravel(), vals.ravel()))
    cp = _all_cp(cfg)
    report = {
        "command": cfg.command,
        "method": method,
        "times": [float(t) for t in times],
        "min_value": [float(v) for v in rep.min_values],
        "normalization": [float(v) for v in rep.normalizations],
        "became_negative": rep.became_negative,
        "first_negative_time": rep.first_negative_time,
        "completely_positive": cp,
    }
    _write_json(out / "report.json", report)
    return (EXIT_NEGATIVE if cp and rep.became_negative else EXIT_OK), report


def cmd_check(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    rates = DecoherenceRates.from_array(cfg.rates)
    v = is_elliptic(rates, cfg.scan)
    witness = None
    if v.witness is not None:
        p, lam = v.witness
        witness = {"theta": p.theta, "phi": p.phi, "min_eigenvalue": lam}
    verdict = {
        "rates": list(cfg.rates),
        "elliptic": v.elliptic,
        "strictly": v.strictly,
        "numeric_elliptic": v.numeric_elliptic,
        "min_eigenvalue": v.min_eigenvalue,
        "witness": witness,
        "admissibility": rates_admissible(rates).value,
    }
    _write_json(out / "verdict.json", verdict)
    return (EXIT_OK if v.elliptic else EXIT_NEGATIVE), verdict


def cmd_classify(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    report = classify_schedule(cfg.rates_schedule(), cfg.t_grid.times(), cfg.scan).to_dict()
    _write_json(out / "report.json", report)
    return (EXIT_OK if report["overall"] == Divisibility.CP_DIVISIBLE.value else EXIT_NEGATIVE), report


def bracket_table() -> list[tuple[int, int, float, float, float, float]]:
    """{f_i, f_j} for i, j in 0..3 as rows (i, j, c0, c1, c2, c3)."""
    basis = [geo.KahlerFunction(1.0, (0, 0, 0))] + [geo.KahlerFunction(0.0, np.eye(3)[k]) for k in range(3)]
    rows = []
    for i, f in enumerate(basis):
        for j, g in enumerate(basis):
            b = geo.poisson_bracket(f, g)
            rows.append((i, j, b.c0, *b.c))
    return rows


def cmd_bracket_table(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    rows = bracket_table()
    ok = True
    for i, j, c0, *c in rows:
        expected = np.zeros(3)
        if i and j:
            expected = 4 * np.cross(np.eye(3)[i - 1], np.eye(3)[j - 1])
        ok &= c0 == 0 and np.array_equal(np.array(c), expected)
    _write_csv(out / "brackets.csv", ["i", "j", "c0", "c1", "c2", "c3"], rows)
    report = {"command": cfg.command, "su2_relations_hold": bool(ok)}
    _write_json(out / "report.json", report)
    return (EXIT_OK if ok else EXIT_NEGATIVE), report


def cmd_demo_negativity(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    rates = DecoherenceRates.from_array(cfg.rates)
    verdict = rates_admissible(rates)
    search = find_negativity(rates, cfg.t_grid.times(), tol=cfg.tol)
    expected = verdict is not Admissibility.COMPLETELY_POSITIVE
    report = {
        "command": cfg.command,
        "rates": list(cfg.rates),
        "admissibility": verdict.value,
        "found": search.found,
        "first_negative_time": search.first_negative_time,
        "growth_rate": search.growth_rate,
        "degree": search.degree,
        "initial_min": search.min_initial,
        "candidates_tried": search.candidates_tried,
        "dipole_only_min": search.dipole_only_min,
    }
    if search.initial is not None:
        _write_csv(out / "harmonics.csv", ["t", "l", "m", "re", "im"], _harmonic_rows([0.0], [search.initial]))
    _write_json(out / "report.json", report)
    return (EXIT_OK if search.found == expected else EXIT_NEGATIVE), report


COMMAND_TABLE = {
    "evolve-density": cmd_evolve_density,
    "evolve-distribution": cmd_evolve_distribution,
    "check": cmd_check,
    "classify": cmd_classify,
    "bracket-table": cmd_bracket_table,
    "demo-negativity": cmd_demo_negativity,
}


def run(cfg: RunConfig, out: str | Path | None = None) -> tuple[int, dict]:
    out = Path(out or cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return COMMAND_TABLE[cfg.command](cfg, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kahler-decoherence",
        description="Qubit decoherence on the Bloch sphere: channel and diffusion pictures.",
    )
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON run configuration")
    src.add_argument("--stdin", action="store_true", help="read the configuration from standard input")
    parser.add_argument("--out", help="output directory (default: config 'out' or the current directory)")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary line")
    args = parser.parse_args(argv)

    try:
        text = sys.stdin.read() if args.stdin else Path(args.config).read_text()
        cfg = parse_config(text)
        code, summary = run(cfg, args.out)
    except (DecoherenceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.quiet:
        print(json.dumps(summary, sort_keys=True, default=_json_default))
    return code


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


if __name__ == "__main__":
    sys.exit(main())
