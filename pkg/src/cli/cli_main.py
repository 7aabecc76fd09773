#!/usr/bin/env python3
"""
cli_main.py

Command line front end: gl-solve, quantize, dim, approx and verify. Global
flags build a RunConfig that every subcommand reads from the click context.
Toolkit errors are turned into their exit codes in FractalGroup.invoke.

Status: Development
"""

import logging

import click

from cli.verify_suites import SUITES, run_suites
from fractals.config import DEFAULT_CENTER_CAP, DEFAULT_LLOYD_RESTARTS, DEFAULT_RATIO_FLOOR, DEFAULT_SEED, DEFAULT_TRIALS, RunConfig
from fractals.construct import (
    approximate_measure_lower_dim,
    approximate_measure_quant_dim,
    approximate_set_equal_dims,
    approximate_set_lower_dim,
    approximate_set_split_dims,
)
from fractals.errors import BudgetError, FractalError
from fractals.geometry import PointSet, ScaleGrid, diameter
from fractals.ifs import IFSystem
from fractals.lowerdim import estimate_lower_dim_measure, estimate_lower_dim_set
from fractals.quantization import (
    EXACT,
    LLOYD,
    error_curve,
    estimate_quant_dim,
    quant_error_exact_1d,
    quant_error_lloyd,
    solve_graf_luschgy,
)
from utils.file_operations import (
    dumps_csv,
    dumps_json,
    read_json,
    read_measure_csv,
    read_points_csv,
    save_csv,
    save_json,
    save_measure_csv,
    save_points_csv,
)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


class FractalGroup(click.Group):
    """Click group that reports toolkit errors on stderr and exits with their code."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except BudgetError as e:
            click.echo(f"error: {e}", err=True)
            click.echo(dumps_json({"budget": e.breakdown}), err=True)
            ctx.exit(e.exit_code)
        except FractalError as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(e.exit_code)


def emit(cfg: RunConfig, data, rows=None, columns=None):
    """Print (or write to --out) the primary output in the selected format."""
    if cfg.fmt == "csv" and rows is not None:
        text = dumps_csv(rows, columns)
    else:
        text = dumps_json(data) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as f:
            f.write(text)
        logging.info(f"output saved to {cfg.out}")
    else:
        click.echo(text, nl=False)


def default_grid(points: PointSet, r_min, r_max, levels, ratio_floor, min_atoms=1) -> ScaleGrid:
    """Triadic default: r_max = diam / 9 and r_min = r_max / 3^(levels - 1)."""
    if r_max is None:
        r_max = diameter(points) / 9
    if r_min is None:
        r_min = r_max / 3 ** (levels - 1)
    return ScaleGrid(r_min, r_max, levels, ratio_floor, min_atoms)


@click.group(cls=FractalGroup)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Seed for every randomized step.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the primary output here (approx: file base).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--depth", type=int, default=10, show_default=True, help="Discretization depth for constructions.")
@click.option("--trials", type=int, default=DEFAULT_TRIALS, show_default=True, help="Trials per verified property.")
@click.option("--log-level", type=click.Choice(LOG_LEVELS), default="WARNING", show_default=True)
@click.pass_context
def cli(ctx, seed, out, fmt, depth, trials, log_level):
    """Lower and quantization dimensions of self-similar sets and measures."""
    logging.getLogger().setLevel(log_level)
    ctx.obj = RunConfig(seed=seed, depth=depth, trials=trials, out=out, fmt=fmt, log_level=log_level)
    logging.debug(f"run configuration: {ctx.obj}")


@cli.command("gl-solve")
@click.argument("ifs_file", type=click.Path(dir_okay=False))
@click.option("--r", "order", type=float, default=2.0, show_default=True, help="Quantization order.")
@click.pass_obj
def gl_solve(cfg, ifs_file, order):
    """Solve the Graf-Luschgy equation for the system in IFS_FILE."""
    system = IFSystem.from_dict(read_json(ifs_file))
    solution = solve_graf_luschgy(system.probabilities, system.ratios, order)
    emit(cfg, solution.to_dict(), [[solution.value, solution.residual, solution.x]], ["D", "residual", "x"])


@cli.command("quantize")
@click.argument("measure_file", type=click.Path(dir_okay=False))
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Codebook size.")
@click.option("--r", "order", type=float, default=2.0, show_default=True)
@click.option("--exact/--lloyd", default=True, show_default=True, help="Exact 1D dynamic program or Lloyd upper bound.")
@click.option("--restarts", type=click.IntRange(min=1), default=DEFAULT_LLOYD_RESTARTS, show_default=True)
@click.pass_obj
def quantize(cfg, measure_file, n, order, exact, restarts):
    """Quantization error V_{n,r} and an optimal (or Lloyd) codebook."""
    mu = read_measure_csv(measure_file)
    if exact:
        result = quant_error_exact_1d(mu, n, order)
    else:
        result = quant_error_lloyd(mu, n, order, restarts=restarts, seed=cfg.seed)
    emit(cfg, result.to_dict(), [[result.n, result.r, result.error, result.exact]], ["n", "r", "V", "exact"])


@cli.group("dim", cls=FractalGroup)
def dim():
    """Dimension estimators."""


def _grid_options(command):
    command = click.option("--r-min", type=float, default=None, help="Smallest scale (default r_max / 3^(levels-1)).")(command)
    command = click.option("--r-max", type=float, default=None, help="Largest scale (default diameter / 9).")(command)
    command = click.option("--levels", type=click.IntRange(min=2), default=8, show_default=True)(command)
    command = click.option("--ratio-floor", type=float, default=DEFAULT_RATIO_FLOOR, show_default=True)(command)
    command = click.option("--center-cap", type=click.IntRange(min=1), default=DEFAULT_CENTER_CAP, show_default=True)(command)
    command = click.option("--dump", type=click.Path(dir_okay=False), default=None, help="Witness CSV path.")(command)
    return command


def _emit_estimate(cfg, estimate, dump, dim_count):
    if dump:
        columns = [f"cx{j}" for j in range(1, dim_count + 1)] + ["r", "R", "exponent"]
        save_csv(estimate.witness_records(), columns, dump)
    emit(cfg, estimate.to_dict(), [[estimate.value, estimate.method]], ["value", "method"])


@dim.command("lower-set")
@click.argument("points_file", type=click.Path(dir_okay=False))
@_grid_options
@click.pass_obj
def dim_lower_set(cfg, points_file, r_min, r_max, levels, ratio_floor, center_cap, dump):
    """Lower dimension estimate of the point set in POINTS_FILE."""
    points = read_points_csv(points_file)
    grid = default_grid(points, r_min, r_max, levels, ratio_floor)
    _emit_estimate(cfg, estimate_lower_dim_set(points, grid, center_cap), dump, points.dim)


@dim.command("lower-measure")
@click.argument("measure_file", type=click.Path(dir_okay=False))
@_grid_options
@click.option("--min-atoms", type=click.IntRange(min=1), default=1, show_default=True)
@click.pass_obj
def dim_lower_measure(cfg, measure_file, r_min, r_max, levels, ratio_floor, center_cap, dump, min_atoms):
    """Lower dimension estimate of the measure in MEASURE_FILE."""
    mu = read_measure_csv(measure_file)
    grid = default_grid(mu.support, r_min, r_max, levels, ratio_floor, min_atoms)
    _emit_estimate(cfg, estimate_lower_dim_measure(mu, grid, center_cap), dump, mu.dim)


@dim.command("quant")
@click.argument("measure_file", type=click.Path(dir_okay=False))
@click.option("--r", "order", type=float, default=2.0, show_default=True)
@click.option("--n-max", type=click.IntRange(min=1), default=32, show_default=True)
@click.option("--engine", type=click.Choice([EXACT, LLOYD]), default=EXACT, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=DEFAULT_LLOYD_RESTARTS, show_default=True)
@click.option("--window", type=(int, int), default=None, help="Fit window n_lo n_hi (default: larger half).")
@click.option("--dump", type=click.Path(dir_okay=False), default=None, help="Error curve CSV path.")
@click.pass_obj
def dim_quant(cfg, measure_file, order, n_max, engine, restarts, window, dump):
    """Quantization dimension estimate of the measure in MEASURE_FILE."""
    mu = read_measure_csv(measure_file)
    curve = error_curve(mu, n_max, order, mode=engine, restarts=restarts, seed=cfg.seed)
    if dump:
        save_csv(curve.to_records(), ["n", "V", "exact"], dump)
    estimate = estimate_quant_dim(curve, window)
    emit(cfg, estimate.to_dict(), [[estimate.value, estimate.method]], ["value", "method"])


@cli.group("approx", cls=FractalGroup)
def approx():
    """Constructive approximations with a prescribed dimension."""


def _block_points(result):
    """Realized points of the block started at the first anchor."""
    first = result.anchors.points[0, 0]
    width = result.block.width or 0.0
    pts = result.realized.points[:, 0]
    return PointSet(pts[(pts >= first - 1e-12) & (pts <= first + width + 1e-12)].reshape(-1, 1))


def _set_cross_check(result):
    if result.block.kind not in ("cantor", "interval"):
        return {"skipped": "block without fine structure"}
    block = _block_points(result)
    try:
        grid = default_grid(block, None, None, 8, DEFAULT_RATIO_FLOOR)
        return {"lower_set_estimate": estimate_lower_dim_set(block, grid).value}
    except FractalError as e:
        return {"skipped": str(e)}


def _measure_cross_check(result, order):
    measure = result.realized
    checks = {}
    try:
        checks["lower_measure_estimate"] = estimate_lower_dim_measure(
            measure, default_grid(measure.support, None, None, 8, DEFAULT_RATIO_FLOOR)
        ).value
    except FractalError as e:
        checks["lower_measure_estimate"] = f"skipped: {e}"
    if measure.dim == 1:
        try:
            checks["quant_estimate"] = estimate_quant_dim(error_curve(measure, 32, order)).value
        except FractalError as e:
            checks["quant_estimate"] = f"skipped: {e}"
    return checks


def _write_approximation(cfg, symbolic, save_realized, report):
    if not cfg.out:
        click.echo(dumps_json(report))
        return
    base = cfg.out
    save_json(symbolic, f"{base}_symbolic.json")
    save_realized(f"{base}_realized.csv")
    save_json(report, f"{base}_report.json")
    click.echo(dumps_json({"symbolic": f"{base}_symbolic.json", "realized": f"{base}_realized.csv",
                           "report": f"{base}_report.json"}))


@approx.command("set")
@click.argument("points_file", type=click.Path(dir_okay=False))
@click.option("--epsilon", type=float, required=True)
@click.option("--gamma", type=float, default=None, help="Target dimension (not used by --kind split).")
@click.option("--kind", type=click.Choice(["lower", "equal", "split"]), default="lower", show_default=True)
@click.option("--verify/--no-verify", default=True, show_default=True)
@click.pass_obj
def approx_set(cfg, points_file, epsilon, gamma, kind, verify):
    """Approximate the set in POINTS_FILE within EPSILON (Hausdorff)."""
    points = read_points_csv(points_file)
    if kind == "split":
        result = approximate_set_split_dims(points, epsilon, cfg.depth)
    else:
        if gamma is None:
            raise click.UsageError("--gamma is required unless --kind split")
        build = approximate_set_lower_dim if kind == "lower" else approximate_set_equal_dims
        result = build(points, epsilon, gamma, cfg.depth)
    report = result.to_dict()
    report["kind"] = kind
    if verify:
        report["cross_check"] = _set_cross_check(result)
    _write_approximation(cfg, result.to_dict(), lambda path: save_points_csv(result.realized, path), report)


def _approx_measure(cfg, result, order, verify):
    report = result.to_dict()
    if verify:
        report["cross_check"] = _measure_cross_check(result, order)
    _write_approximation(cfg, result.symbolic.to_dict(), lambda path: save_measure_csv(result.realized, path), report)


@approx.command("measure-lower")
@click.argument("measure_file", type=click.Path(dir_okay=False))
@click.option("--epsilon", type=float, required=True)
@click.option("--beta", type=float, required=True, help="Target lower dimension.")
@click.option("--r", "order", type=float, default=2.0, show_default=True, help="Order for the reported quantization dimension.")
@click.option("--verify/--no-verify", default=True, show_default=True)
@click.pass_obj
def approx_measure_lower(cfg, measure_file, epsilon, beta, order, verify):
    """Approximate the measure in MEASURE_FILE within EPSILON with lower dimension BETA."""
    mu = read_measure_csv(measure_file)
    _approx_measure(cfg, approximate_measure_lower_dim(mu, epsilon, beta, depth=cfg.depth, r=order), order, verify)


@approx.command("measure-quant")
@click.argument("measure_file", type=click.Path(dir_okay=False))
@click.option("--epsilon", type=float, required=True)
@click.option("--alpha", type=float, required=True, help="Target quantization dimension.")
@click.option("--r", "order", type=float, default=2.0, show_default=True)
@click.option("--verify/--no-verify", default=True, show_default=True)
@click.pass_obj
def approx_measure_quant(cfg, measure_file, epsilon, alpha, order, verify):
    """Approximate the measure in MEASURE_FILE within EPSILON with quantization dimension ALPHA."""
    mu = read_measure_csv(measure_file)
    _approx_measure(cfg, approximate_measure_quant_dim(mu, epsilon, alpha, r=order, depth=cfg.depth), order, verify)


@cli.command("verify")
@click.argument("suite", type=click.Choice(["all", *SUITES]), default="all")
@click.pass_context
def verify(ctx, suite):
    """Run the randomized property suites; exit 1 if any property fails."""
    cfg = ctx.obj
    report = run_suites(suite, cfg.seed, cfg.trials)
    emit(cfg, report)
    if not report["passed"]:
        ctx.exit(1)
