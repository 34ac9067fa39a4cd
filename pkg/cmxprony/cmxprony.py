"""
cmxprony - Prony fits of moment generating functions and the connected-moments expansion.
"""

import asyncio
import csv
import functools
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from cmxprony import __shortname__, __version__
from cmxprony.cmx import (
    CmxApproximant,
    ZnApproximant,
    cmx_from_connected,
    correlation_squared,
    eval_EN,
    eval_UN,
    order_scan,
    zn_from_moments,
)
from cmxprony.config import DEFAULT_T, DEFAULT_TAU, RunConfig, build_config
from cmxprony.errors import (
    ConfigError,
    DimensionMismatch,
    NonNormalizable,
    PoleEncountered,
    PronyError,
    Unconverged,
)
from cmxprony.models import MODELS
from cmxprony.moments import connected_moments
from cmxprony.reference import reference_Z_E_C

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_SOLVER = 3
SPECTRUM_LEVELS = 32


def format_decimal(value: float) -> str:
    """12 significant digits."""
    return f"{value:.12g}"


def format_rational(value: Fraction) -> str:
    """Exact 'p/q' rendering."""
    return f"{value.numerator}/{value.denominator}"


def json_number(value):
    """Real values as rounded floats, complex ones as {re, im}; NaN becomes null."""
    value = complex(value)
    if value.imag:
        return {"re": json_number(value.real), "im": json_number(value.imag)}
    if math.isnan(value.real):
        return None
    return float(format_decimal(value.real))


def setup_logging(verbose: int):
    level = max(logging.DEBUG, logging.WARNING - 10 * verbose)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@dataclass
class OrderResult:
    """One order of an N range: either an approximant or a failure record."""

    N: int
    value: object = None
    error: dict | None = None


async def run_orders(build, orders: tuple[int, ...], range_mode: bool = True) -> list[OrderResult]:
    """
    Build one approximant per order concurrently.

    Args:
        build: Callable taking N and returning an approximant
        orders: Orders to build
        range_mode: Record solver failures instead of raising them

    Returns:
        Results in the order of ``orders``
    """

    async def run_order(n: int) -> OrderResult:
        try:
            value = await asyncio.to_thread(build, n)
            return OrderResult(n, value)
        except (PronyError, PoleEncountered) as e:
            if not range_mode:
                raise
            logger.warning("N=%d failed: %s", n, e)
            return OrderResult(n, error={"N": n, "error": type(e).__name__, "message": str(e)})

    tasks = [run_order(n) for n in orders]
    return list(await asyncio.gather(*tasks))


# ---------------------------------------------------------------------------
# Records and output
# ---------------------------------------------------------------------------

def _solution_fields(solution) -> dict:
    if solution is None:
        return {"residual": 0.0, "cond": None, "flagged": False}
    return {
        "residual": json_number(solution.residual),
        "cond": {"hankel": json_number(solution.cond.hankel), "vandermonde": json_number(solution.cond.vandermonde)},
        "flagged": solution.flagged,
    }


def cmx_record(c: CmxApproximant) -> dict:
    return {
        "N": c.N,
        "A0": json_number(c.A0),
        "A": [json_number(v) for v in c.A],
        "b": [json_number(v) for v in c.b],
        **_solution_fields(c.solution),
        "diagnostics": c.diagnostics.as_dict(),
        "hadamard": c.hadamard.as_dict(),
        "highest_moment": c.highest_moment,
    }


def zn_record(z: ZnApproximant) -> dict:
    return {
        "N": z.N,
        "A": [json_number(v) for v in z.A],
        "W": [json_number(v) for v in z.W],
        **_solution_fields(z.solution),
        "highest_moment": z.highest_moment,
    }


def records(results: list[OrderResult], to_record) -> list[dict]:
    return [r.error if r.error else to_record(r.value) for r in results]


def curve_table(axis: str, points: np.ndarray, columns: dict[str, np.ndarray]) -> tuple[list[str], list[list[str]]]:
    header = [axis, *columns]
    rows = []
    for i, x in enumerate(points):
        rows.append([format_decimal(x), *(format_decimal(float(col[i])) for col in columns.values())])
    return header, rows


def curves_json(axis: str, points: np.ndarray, columns: dict[str, np.ndarray]) -> dict:
    out = {axis: [json_number(x) for x in points]}
    out.update({name: [json_number(v) for v in col] for name, col in columns.items()})
    return out


def render(cfg: RunConfig, meta: dict, payload: dict, table: tuple[list[str], list[list[str]]]) -> str:
    if cfg.output_format == "json":
        return json.dumps({"meta": meta, **payload}, indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header, rows = table
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def emit(cfg: RunConfig, meta: dict, payload: dict, table, summary=None):
    """Write to --out (plus a rich summary) or stream to stdout."""
    text = render(cfg, meta, payload, table)
    if cfg.out:
        cfg.out.write_text(text)
        if summary is not None:
            summary()
        console.print(f"[dim]Wrote {cfg.output_format} to {cfg.out}[/dim]")
    else:
        click.echo(text, nl=False)


def make_meta(command: str, cfg: RunConfig, **extra) -> dict:
    return {
        "command": command,
        "model": cfg.model_name,
        "orders": list(cfg.orders),
        "precision": str(cfg.precision),
        "seed": cfg.seed,
        "version": __version__,
        **extra,
    }


def display_records(title: str, rows: list[dict], columns: list[str]):
    """Display per-order records in a rich table."""
    table = Table(title=title, show_header=True, header_style="bold cyan", border_style="dim")
    for name in columns:
        table.add_column(name, style="white" if name != "N" else "dim")
    for row in rows:
        if "error" in row:
            table.add_row(str(row["N"]), f"[red]{escape(row['error'])}[/red]", *[""] * (len(columns) - 2))
            continue
        table.add_row(*(escape(str(row.get(name, ""))) for name in columns))
    console.print()
    console.print(table)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def run_options(func):
    """Options shared by every computing subcommand."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="INI config file"),
        click.option("--model", "-m", help="Catalog model (see `cmxprony models`)"),
        click.option("--N", "orders", help="Order N, or range A..B"),
        click.option("--t", "t", help="Grid START:STOP:COUNT (pi allowed, e.g. 0:pi:121)"),
        click.option("--format", "output_format", type=click.Choice(["csv", "json"]), help="Output format"),
        click.option("--precision", "-p", help="double or ext:DIGITS (DIGITS >= 50)"),
        click.option("--out", "-o", type=click.Path(dir_okay=False), help="Write output to this file"),
        click.option("--seed", type=int, help="Seed recorded with the run"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def handle_errors(func):
    """Map configuration errors to exit 2 and solver failures to exit 3."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ConfigError, DimensionMismatch, NonNormalizable) as e:
            err_console.print(f"[bold red]config error:[/bold red] {escape(str(e))}")
            sys.exit(EXIT_CONFIG)
        except (PronyError, PoleEncountered, Unconverged) as e:
            err_console.print(f"[bold red]{type(e).__name__}:[/bold red] {escape(str(e))}")
            sys.exit(EXIT_SOLVER)

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name=__shortname__)
@click.option("--verbose", "-v", count=True, help="Log progress (-v) or debug detail (-vv)")
def cli(verbose: int):
    """cmxprony - Prony fits of Z(t), the connected-moments expansion and exact references."""
    setup_logging(verbose)


@cli.command("models")
def models_cmd():
    """List the model catalog."""
    table = Table(title="Model Catalog", header_style="bold cyan", border_style="dim")
    table.add_column("Name", style="cyan")
    table.add_column("Dims", style="dim")
    table.add_column("Exact E(t)", style="green")
    table.add_column("Exact |C|^2", style="green")
    table.add_column("Description")

    for name, model_class in MODELS.items():
        model = model_class()
        table.add_row(
            name,
            str(model.dims),
            "yes" if model.has_exact_energy else "-",
            "yes" if model.has_exact_correlation else "-",
            model.description,
        )

    console.print(table)
    console.print(f"\n[dim]Total: {len(MODELS)} model(s) available[/dim]\n")


@cli.command("moments")
@run_options
@click.option("--J", "max_order", type=int, help="Highest moment order (default 13)")
@handle_errors
def moments_cmd(**kwargs):
    """
    Exact moments mu_0..mu_J and connected moments I_1..I_J.

    \b
    Examples:
      cmxprony moments --model ho-knowles --J 7
      cmxprony moments --config run.ini --format json
    """
    cfg = build_config(**kwargs)
    model = cfg.resolve_model()
    m = model.moments(cfg.max_order)
    I = connected_moments(m)

    rows = []
    for j, mu in enumerate(m.mu):
        Ij = I.at(j) if j else None
        rows.append([
            str(j),
            format_rational(mu),
            format_decimal(float(mu)),
            format_rational(Ij) if Ij is not None else "",
            format_decimal(float(Ij)) if Ij is not None else "",
        ])
    payload = {
        "mu": [{"j": j, "exact": format_rational(v), "value": json_number(float(v))} for j, v in enumerate(m.mu)],
        "I": [{"k": k, "exact": format_rational(v), "value": json_number(float(v))} for k, v in enumerate(I.values, 1)],
    }
    table = (["j", "mu", "mu_decimal", "I", "I_decimal"], rows)

    def summary():
        view = [{"j": r[0], "mu": r[2], "I": r[4]} for r in rows]
        display_records(f"Moments: {cfg.model_name}", [dict(v, N=v["j"]) for v in view], ["N", "mu", "I"])

    emit(cfg, make_meta("moments", cfg, J=m.J), payload, table, summary)


@cli.command("cmx")
@run_options
@handle_errors
def cmx_cmd(**kwargs):
    """
    Connected-moments expansion E^(N)(t) and its ground-energy estimate A0.

    \b
    Examples:
      cmxprony cmx --model ho-knowles --N 1..3
      cmxprony cmx --model ho-knowles --N 2..5 --t 0:3:61 --out fig2.csv
    """
    cfg = build_config(**kwargs)
    model = cfg.resolve_model()
    m = model.moments(2 * max(cfg.orders) + 1)
    I = connected_moments(m)

    results = asyncio.run(
        run_orders(lambda n: cmx_from_connected(I, n, cfg.precision), cfg.orders, cfg.range_mode)
    )
    grid = cfg.grid(DEFAULT_T)
    ts = grid.points()
    columns = {f"EN_{r.N}": eval_EN(r.value, ts) for r in results if r.value is not None}
    exact = model.exact_energy_curve(ts)
    if exact is not None:
        columns["exact"] = exact

    rows = records(results, cmx_record)
    payload = {"records": rows, "curves": curves_json("t", ts, columns)}

    def summary():
        view = [
            dict(r, limit=r["diagnostics"]["limit_behavior"], roots=len(r["b"])) if "error" not in r else r
            for r in rows
        ]
        display_records(f"CMX: {cfg.model_name}", view, ["N", "A0", "limit", "residual", "highest_moment"])

    emit(cfg, make_meta("cmx", cfg, grid=str(grid)), payload, curve_table("t", ts, columns), summary)


def _pointwise(fn, approximant, points: np.ndarray) -> np.ndarray:
    try:
        return fn(approximant, points)
    except PoleEncountered as e:
        logger.warning("%s; marking pole points as nan", e)
        values = []
        for x in points:
            try:
                values.append(fn(approximant, float(x)))
            except PoleEncountered:
                values.append(math.nan)
        return np.array(values)


@cli.command("zfit")
@run_options
@handle_errors
def zfit_cmd(**kwargs):
    """
    Exponential fit Z_N(t) of the moments generating function and U^(N)(t).

    \b
    Examples:
      cmxprony zfit --model ho-knowles --N 2..5 --out fig1.csv
      cmxprony zfit --model ho-gaussian --N 5 --format json
    """
    cfg = build_config(**kwargs)
    model = cfg.resolve_model()
    m = model.moments(2 * max(cfg.orders) - 1)

    results = asyncio.run(
        run_orders(lambda n: zn_from_moments(m, n, cfg.precision), cfg.orders, cfg.range_mode)
    )
    grid = cfg.grid(DEFAULT_T)
    ts = grid.points()
    columns = {f"UN_{r.N}": _pointwise(eval_UN, r.value, ts) for r in results if r.value is not None}
    exact = model.exact_energy_curve(ts)
    if exact is not None:
        columns["exact"] = exact

    rows = records(results, zn_record)
    payload = {"records": rows, "curves": curves_json("t", ts, columns)}

    def summary():
        view = [dict(r, A_0=r["A"][0], W_0=r["W"][0]) if "error" not in r else r for r in rows]
        display_records(f"Z_N fit: {cfg.model_name}", view, ["N", "A_0", "W_0", "residual", "highest_moment"])

    emit(cfg, make_meta("zfit", cfg, grid=str(grid)), payload, curve_table("t", ts, columns), summary)


@cli.command("correlation")
@run_options
@handle_errors
def correlation_cmd(**kwargs):
    """
    Survival probability |Z_N(i tau)|^2 against the exact or oracle curve.

    \b
    Examples:
      cmxprony correlation --model ho-gaussian --N 2..5
      cmxprony correlation --model coupled --N 2..5 --t 0:pi:121 --out fig5.csv
    """
    cfg = build_config(**kwargs)
    model = cfg.resolve_model()
    m = model.moments(2 * max(cfg.orders) - 1)

    results = asyncio.run(
        run_orders(lambda n: zn_from_moments(m, n, cfg.precision), cfg.orders, cfg.range_mode)
    )
    grid = cfg.grid(DEFAULT_TAU)
    taus = grid.points()
    columns = {f"C2N_{r.N}": correlation_squared(r.value, taus) for r in results if r.value is not None}

    extra = {}
    exact = model.exact_correlation(taus)
    if exact is not None:
        columns["exact"] = exact
    else:
        with console.status("[bold cyan]Diagonalizing reference...", spinner="dots"):
            ref = model.reference(strict=False)
        columns["oracle"] = reference_Z_E_C(ref, taus)[2]
        extra = {"oracle": {"M": ref.M, "convergence_gap": json_number(ref.convergence_gap), "converged": ref.converged}}

    rows = records(results, zn_record)
    payload = {"records": rows, **extra, "curves": curves_json("tau", taus, columns)}
    emit(cfg, make_meta("correlation", cfg, grid=str(grid)), payload, curve_table("tau", taus, columns))


@cli.command("reference")
@run_options
@handle_errors
def reference_cmd(**kwargs):
    """
    Oracle spectrum of the trial state plus exact closed forms where they exist.

    \b
    Examples:
      cmxprony reference --model ho-knowles
      cmxprony reference --model quartic --format json
    """
    cfg = build_config(**kwargs)
    model = cfg.resolve_model()
    with console.status("[bold cyan]Diagonalizing...", spinner="dots"):
        ref = model.reference(strict=True)

    grid = cfg.grid(DEFAULT_T)
    ts = grid.points()
    Z, E, C2 = reference_Z_E_C(ref, ts)
    columns = {"Z": Z, "E": E, "C2": C2}
    exact_E = model.exact_energy_curve(ts)
    if exact_E is not None:
        columns["exact_E"] = exact_E
    exact_C2 = model.exact_correlation(ts)
    if exact_C2 is not None:
        columns["exact_C2"] = exact_C2

    levels = ref.levels(SPECTRUM_LEVELS)
    payload = {
        "spectrum": {
            "M": ref.M,
            "dims": ref.dims,
            "energies": [json_number(e) for e, _ in levels],
            "overlaps": [json_number(w) for _, w in levels],
            "captured_mass": json_number(ref.captured_mass),
            "convergence_gap": json_number(ref.convergence_gap),
            "converged": ref.converged,
        },
        "curves": curves_json("t", ts, columns),
    }

    def summary():
        view = [{"N": j, "energy": format_decimal(e), "overlap": format_decimal(w)} for j, (e, w) in enumerate(levels[:8])]
        display_records(f"Spectrum: {cfg.model_name} (M={ref.M})", view, ["N", "energy", "overlap"])

    emit(cfg, make_meta("reference", cfg, grid=str(grid)), payload, curve_table("t", ts, columns), summary)


@cli.command("scan")
@run_options
@handle_errors
def scan_cmd(**kwargs):
    """
    Order scan: E^(N) next to Z_(N+1), both from mu_0..mu_(2N+1).

    \b
    Examples:
      cmxprony scan --model ho-knowles --N 1..5
    """
    cfg = build_config(**kwargs)
    model = cfg.resolve_model()
    N_max = max(cfg.orders)
    m = model.moments(2 * N_max + 1)
    scan = order_scan(m, N_max, cfg.precision)

    header = [
        "N", "budget", "highest_moment", "budget_consistent",
        "cmx_N", "A0", "limit", "negative_roots", "cmx_residual",
        "zn_N", "zn_A0", "zn_W0", "zn_residual", "error",
    ]
    rows, payload_rows = [], []
    for row in scan.rows:
        c, z = row.cmx, row.zn
        record = {
            "N": row.N,
            "budget": row.budget,
            "highest_moment": row.highest_moment,
            "budget_consistent": row.budget_consistent,
            "cmx": cmx_record(c) if c else None,
            "zn": zn_record(z) if z else None,
            "errors": [e for e in (row.cmx_error, row.zn_error) if e],
        }
        payload_rows.append(record)
        rows.append([
            str(row.N),
            str(row.budget),
            "" if row.highest_moment is None else str(row.highest_moment),
            str(row.budget_consistent).lower(),
            str(c.N) if c else "",
            format_decimal(c.A0) if c else "",
            c.diagnostics.limit_behavior.value if c else "",
            str(len(c.diagnostics.negative_real_roots)) if c else "",
            format_decimal(c.solution.residual if c.solution else 0.0) if c else "",
            str(z.N) if z else "",
            format_decimal(float(np.real(z.A[0]))) if z else "",
            format_decimal(float(np.real(z.W[0]))) if z else "",
            format_decimal(z.solution.residual) if z else "",
            "; ".join(record["errors"]),
        ])

    def summary():
        view = [dict(zip(header, r)) for r in rows]
        display_records(f"Order scan: {cfg.model_name}", view, ["N", "highest_moment", "cmx_N", "A0", "limit", "zn_N", "zn_W0"])

    emit(cfg, make_meta("scan", cfg), {"rows": payload_rows}, (header, rows), summary)


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
