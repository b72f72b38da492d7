"""Command line front end: run, exact, fit, suite."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import diagnostics, exact, report
from .errors import AmcmcError
from .harness import (TvSeries, config_from_toml, estimate_marginals, fit_rate,
                      rate_fit_to_json, tv_curve)
from .samplers import Algorithm
from .suites import SUITES, run_suite


@click.group()
def main() -> None:
    """Interacting-chain samplers with exact finite-state verification."""


@main.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="TOML file with [model], [algorithm], [experiment] sections.")
def run_cmd(config_path: str) -> None:
    """Monte Carlo TV curve of L(X_n) against the target."""
    try:
        cfg = config_from_toml(config_path)
        marginals = estimate_marginals(cfg)
        series = tv_curve(marginals, cfg.model.pi, bootstrap_seed=cfg.seed)
    except AmcmcError as exc:
        raise click.ClickException(str(exc)) from exc
    if cfg.out is None:
        click.echo("n,tv,stderr")
        for n, tv, se in zip(series.n, series.tv, series.stderr):
            click.echo(f"{n},{tv:.17g},{se:.17g}")
        return
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    series.to_csv(out / "tv_curve.csv")
    report.plot_tv_series(series, out / "tv_curve.png",
                          title=f"{cfg.algorithm.value} TV curve")
    click.echo(f"wrote {out / 'tv_curve.csv'} and {out / 'tv_curve.png'}")


EXACT_OPS = ("stationary", "law", "bn", "eta")


@main.command("exact")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Same TOML layout as `run`; [experiment] supplies n values.")
@click.option("--op", "op", required=True, type=click.Choice(EXACT_OPS))
def exact_cmd(model_path: str, op: str) -> None:
    """Deterministic computations on a finite model (no sampling)."""
    try:
        cfg = config_from_toml(model_path)
        model = cfg.model
        if op == "stationary":
            payload = {
                "kernel_stationary":
                    exact.stationary_distribution(model.kernel).probs.tolist(),
                "aux_stationary":
                    exact.stationary_distribution(model.aux_kernel).probs.tolist(),
            }
            click.echo(json.dumps(payload, indent=2, sort_keys=True))
            return
        cps = sorted(cfg.checkpoints)
        if op == "bn":
            rows = [diagnostics.b_n_exact(model.aux_kernel, cfg.y0, model.w,
                                          n, pi_y=model.pi_y)
                    for n in cps]
            click.echo("n,first_term,second_term,b_n")
            for r in rows:
                click.echo(f"{r.n},{r.first_term:.17g},{r.second_term:.17g},"
                           f"{r.b_n:.17g}")
            return
        if op == "eta":
            click.echo("n," + ",".join(f"p{j}" for j in range(model.size)))
            for n in cps:
                eta = exact.eta_oracle(model.aux_kernel, cfg.y0, model.w, n)
                click.echo(f"{n}," + ",".join(f"{p:.17g}" for p in eta.probs))
            return
        # op == "law": exact IRMCMC marginal TV curve
        if cfg.algorithm is not Algorithm.IRMCMC:
            raise click.ClickException(
                "exact marginal laws are available for algorithm 'irmcmc' only")
        wv = model.w.values
        if np.allclose(wv, wv[0]):
            etas = exact.eta_sequence_uniform(model.aux_kernel, cfg.y0,
                                              max(cps) - 1)
        else:
            # brute-force path enumeration: only viable for small n
            etas = exact.eta_sequence(model.aux_kernel, cfg.y0, model.w,
                                      max(cps) - 1)
        click.echo("n,tv,stderr")
        for n in cps:
            law = exact.exact_irmcmc_law(model.kernel, cfg.epsilon, etas,
                                         cfg.x0, n)
            tv = 0.5 * float(np.abs(law.probs - model.pi.probs).sum())
            click.echo(f"{n},{tv:.17g},0")
    except AmcmcError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command("fit")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV with columns n, tv, stderr.")
@click.option("--window", required=True,
              help="Fit window as lo,hi (inclusive, in n).")
@click.option("--noise-floor", type=float, default=0.0, show_default=True,
              help="Plug-in TV noise floor sqrt(S/R) of the input series.")
def fit_cmd(input_path: str, window: str, noise_floor: float) -> None:
    """Log-log rate fit of a TV series over an n-window."""
    try:
        lo, hi = (int(part) for part in window.split(","))
    except ValueError:
        raise click.ClickException("--window must look like 16,4096")
    try:
        series = TvSeries.from_csv(input_path, noise_floor=noise_floor)
        fit = fit_rate(series, (lo, hi))
    except AmcmcError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(rate_fit_to_json(fit), indent=2, sort_keys=True))


@main.command("suite")
@click.argument("name", type=click.Choice(sorted(SUITES)))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=None, help="Directory for JSON verdicts, CSVs, figures.")
def suite_cmd(name: str, seed: int, out_dir: str | None) -> None:
    """Run one acceptance bundle; exit 0 iff every check passes."""
    status, results = run_suite(name, seed=seed, out_dir=out_dir)
    for res in results:
        verdict = "PASS" if res.passed else "FAIL"
        click.echo(f"{res.name}: {verdict} ({res.elapsed:.1f}s)")
    sys.exit(status)


if __name__ == "__main__":
    main()
