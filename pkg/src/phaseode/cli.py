"""Command line interface and experiment harness.

    phaseode solve exp1 --omega 2^10
    phaseode sweep exp3 --omega-min 2^8 --omega-max 2^20 --format json --out exp3.json
    phaseode check
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass

import click
import numpy as np

from . import checks, oracle, problems, solver
from .errors import ArgumentError, PhaseODEError

EXIT_ERROR = 2
EXIT_VIOLATION = 3
FIELDS = ("omega", "runtime_ms", "max_rel_error", "coeff_count", "Omega")


def parse_number(text):
    """Parse ``"2^8"``, ``"2**8"`` or a plain float."""
    s = str(text).strip().replace("**", "^")
    try:
        if "^" in s:
            base, exp = s.split("^", 1)
            return float(base) ** float(exp)
        return float(s)
    except ValueError:
        raise ArgumentError(f"cannot parse number {text!r}") from None


def parse_vector(text):
    try:
        return tuple(complex(p.strip().replace("i", "j")) for p in text.split(","))
    except ValueError:
        raise ArgumentError(f"cannot parse vector {text!r}") from None


@dataclass(frozen=True)
class SweepRow:
    omega: float
    runtime_ms: float | None
    max_rel_error: float | None
    coeff_count: int | None
    Omega: float | None
    error: str | None = None


def run_experiment(problem_id, omegas, reps=10, oracle_cap=2.0 ** 12, k=30,
                   eps_disc=None, eps_phase=None, window=None, v=None, progress=None):
    """One :class:`SweepRow` per frequency; failures are recorded, not raised.

    ``runtime_ms`` averages build plus solve over ``reps`` repetitions after
    one untimed warm-up run.  The oracle comparison runs only for
    ``omega <= oracle_cap``.
    """
    prob = problems.get(problem_id)
    if reps < 1:
        raise ArgumentError("reps must be at least 1")
    rows = []
    for omega in omegas:
        omega = float(omega)
        if not omega > 0:
            raise ArgumentError(f"omega must be positive, got {omega}")
        try:
            inp = prob.solver_input(omega, k, eps_disc, eps_phase, window, v)
            prob.solve(solver.build(inp))
            start = time.perf_counter()
            for _ in range(reps):
                fm = solver.build(inp)
                sol = prob.solve(fm)
            runtime = 1e3 * (time.perf_counter() - start) / reps
            err = None
            if omega <= oracle_cap:
                err = oracle.error_metric(sol, prob.reference(omega))
            big = solver.frequency(inp.spec, omega).Omega
            row = SweepRow(omega, runtime, err, fm.coeff_count(), big)
        except PhaseODEError as exc:
            row = SweepRow(omega, None, None, None, None, f"{type(exc).__name__}: {exc}")
        if progress is not None:
            progress(row)
        rows.append(row)
    return rows


def _cell(x):
    if x is None:
        return ""
    return repr(x) if isinstance(x, float) else str(x)


def emit(table, fmt="csv", path=None):
    """Write the table as CSV or JSON to ``path`` (or return the text if ``path`` is None)."""
    if not table:
        raise ArgumentError("nothing to emit: empty table")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for row in table:
            w.writerow([_cell(getattr(row, f)) for f in FIELDS])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([asdict(row) for row in table], indent=2) + "\n"
    else:
        raise ArgumentError(f"unknown format {fmt!r}")
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def _solution_table(fm, sol, points):
    a, b = fm.interval
    t = np.linspace(a, b, points)
    y = sol(t)
    header = ["t"] + [f"{part}_y{i + 1}" for i in range(fm.n) for part in ("re", "im")]
    rows = [[repr(float(ti))] + [repr(float(getattr(z, p))) for z in yi for p in ("real", "imag")]
            for ti, yi in zip(t, y)]
    return header, rows


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_ERROR)


@click.group()
def main():
    """Phase-function solver for oscillatory linear ODE systems."""


@main.command()
@click.argument("problem_id")
@click.option("--omega", required=True, help="frequency parameter, e.g. 2^10")
@click.option("--k", default=30, show_default=True, type=int)
@click.option("--eps-disc", default=None, type=float)
@click.option("--eps-phase", default=None, type=float)
@click.option("--window", default=None, help="Levin window a0,b0")
@click.option("--cyclic", default=None, help="cyclic vector v1,v2,...")
@click.option("--points", default=201, show_default=True, type=int,
              help="sample points for CSV output")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def solve(problem_id, omega, k, eps_disc, eps_phase, window, cyclic, points, fmt, out):
    """Build the fundamental matrix and solve the registered problem."""
    try:
        prob = problems.get(problem_id)
        w = parse_number(omega)
        win = tuple(v.real for v in parse_vector(window)) if window else None
        v = parse_vector(cyclic) if cyclic else None
        fm = solver.build(prob.solver_input(w, k, eps_disc, eps_phase, win, v))
        sol = prob.solve(fm)
    except (PhaseODEError, ValueError) as exc:
        _fail(exc)
    if fmt == "csv":
        header, rows = _solution_table(fm, sol, points)
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
        text = buf.getvalue()
    else:
        stats = {key: val for key, val in fm.stats.items()}
        text = json.dumps({
            "problem": problem_id, "omega": w, "coeff_count": fm.coeff_count(),
            "c": [[z.real, z.imag] for z in sol.c], "condition_residual": sol.residual,
            "stats": stats, "fundamental_matrix": fm.to_json()}) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("problem_id")
@click.option("--omega-min", default="2^8", show_default=True)
@click.option("--omega-max", default="2^20", show_default=True)
@click.option("--oracle-cap", default="2^12", show_default=True)
@click.option("--reps", default=10, show_default=True, type=int)
@click.option("--k", default=30, show_default=True, type=int)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def sweep(problem_id, omega_min, omega_max, oracle_cap, reps, k, fmt, out):
    """Time the solver at every power of two between the frequency bounds."""
    try:
        lo, hi = parse_number(omega_min), parse_number(omega_max)
        if not 0 < lo <= hi:
            raise ArgumentError("need 0 < omega-min <= omega-max")
        omegas = [2.0 ** e for e in range(math.ceil(math.log2(lo) - 1e-12),
                                          math.floor(math.log2(hi) + 1e-12) + 1)]
        if not omegas:
            raise ArgumentError("no power of two between the frequency bounds")

        def progress(row):
            msg = row.error or f"{row.runtime_ms:.2f} ms, {row.coeff_count} coefficients"
            click.echo(f"omega={row.omega:g}: {msg}", err=True)

        table = run_experiment(problem_id, omegas, reps, parse_number(oracle_cap), k,
                               progress=progress)
        text = emit(table, fmt, out)
    except (PhaseODEError, ValueError) as exc:
        _fail(exc)
    if out is None:
        click.echo(text, nl=False)
    if any(row.error for row in table):
        sys.exit(EXIT_ERROR)


@main.command()
def check():
    """Run the acceptance checks; exit 3 if any is violated."""
    results = checks.run_all(report=click.echo)
    if not all(r.passed for r in results):
        sys.exit(EXIT_VIOLATION)


if __name__ == "__main__":
    main()
