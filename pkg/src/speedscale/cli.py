"""``speedscale`` command line.

Every option can also be set through an environment variable named
``SPEEDSCALE_<COMMAND>_<OPTION>`` (for example ``SPEEDSCALE_SOLVE_SEED``);
an explicit flag wins.

Exit codes: 0 ok, 1 verification failed, 2 infeasible, 3 I/O, format or
usage error, 4 checksum mismatch.
"""

from __future__ import annotations

import io
import logging
import sys
from dataclasses import replace
from fractions import Fraction
from typing import Optional

import click

from . import experiments, fileio
from .instances import KINDS, generate
from .lp import build_config_lp, dump_lp
from .model import (
    MULTI, SINGLE, InfeasibleError, Instance, ParameterError, Processor, ProcessorSet, verify,
)
from .multi import BACKENDS, PIPELINE, solve_multi
from .oracle import brute_force_single
from .single import solve_single
from .yds import yds_schedule

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INFEASIBLE = 2
EXIT_FORMAT = 3
EXIT_CHECKSUM = 4

ENV_PREFIX = "SPEEDSCALE"


def _load_instance(path: str) -> Instance:
    return fileio.loads_instance(fileio.read_text(path))


def _with_alpha(instance: Instance, alpha: Optional[float]) -> Instance:
    if alpha is None:
        return instance
    procs = ProcessorSet(tuple(Processor(p.id, alpha) for p in instance.processors))
    return replace(instance, processors=procs)


@click.group(context_settings={"auto_envvar_prefix": ENV_PREFIX, "show_default": True})
@click.option("-v", "--verbose", count=True, help="Log more (repeat for debug output).")
def main(verbose: int):
    """Energy-minimizing non-preemptive scheduling with speed scaling."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("kind", type=click.Choice(KINDS))
@click.option("-n", "--n", "n", type=click.IntRange(min=1), required=True, help="Number of jobs.")
@click.option("-m", "--m", "m", type=click.IntRange(min=1), default=1, help="Number of processors.")
@click.option("--seed", type=int, default=0)
@click.option("--alpha", type=click.FloatRange(min=1, min_open=True), default=2.0)
@click.option("--horizon", type=click.IntRange(min=2), default=None,
              help="Latest release date (default 2n).")
@click.option("--max-len", type=click.IntRange(min=1), default=None, help="Longest window.")
@click.option("--max-work", type=click.IntRange(min=1), default=5)
@click.option("--eligibility", type=click.FloatRange(0, 1), default=0.8,
              help="Probability that a job may run on a given processor.")
@click.option("--out", "-o", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Output file (default stdout).")
def gen(kind, n, m, seed, alpha, horizon, max_len, max_work, eligibility, out):
    """Generate a seeded instance file."""
    if kind == "nested" and n < 2:
        raise click.BadParameter("a nested instance needs at least two jobs", param_hint="-n")
    inst = generate(kind, n, m, seed, alpha=alpha, horizon=horizon, max_len=max_len,
                    max_work=max_work, eligibility=eligibility)
    fileio.write_text(out, fileio.dumps_instance(inst))


def _print_summary(energy, lp_objective, bounds, err=False):
    click.echo(f"energy        {energy:.10g}", err=err)
    click.echo(f"lp_objective  {lp_objective:.10g}", err=err)
    click.echo(f"ratio         {energy / lp_objective:.10g}", err=err)
    for name, value in bounds.items():
        click.echo(f"bound {name:<28} {value:.10g}", err=err)


@main.command()
@click.argument("instance_file", type=click.Path(dir_okay=False))
@click.option("--alpha", type=click.FloatRange(min=1, min_open=True), default=None,
              help="Override alpha on every processor.")
@click.option("--epsilon", type=click.FloatRange(min=0, min_open=True), default=1.0)
@click.option("--seed", type=int, default=0)
@click.option("--trials", type=click.IntRange(min=1), default=32)
@click.option("--slot-cap", type=click.IntRange(min=1), default=None,
              help="Upper limit on slots per landmark gap.")
@click.option("--backend", type=click.Choice(BACKENDS), default=PIPELINE,
              help="Per-processor conversion for multi-mode instances.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="Schedule file (default stdout).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--dump-lp", "dump_lp_file", type=click.Path(dir_okay=False), default=None,
              help="Also write the configuration LP in CPLEX LP format.")
def solve(instance_file, alpha, epsilon, seed, trials, slot_cap, backend, out, fmt, dump_lp_file):
    """Solve an instance and write the schedule.

    Single-mode instances use the single-processor algorithm; multi-mode
    instances assign jobs to processors first and then convert each
    processor with BACKEND.
    """
    inst = _with_alpha(_load_instance(instance_file), alpha)
    eps = Fraction(epsilon).limit_denominator(10 ** 6)
    if dump_lp_file:
        lp_text = io.StringIO()
        dump_lp(build_config_lp(inst, eps, slot_cap), lp_text)
        fileio.write_text(dump_lp_file, lp_text.getvalue())
    if inst.mode == SINGLE:
        res = solve_single(inst, eps, seed=seed, trials=trials, slot_cap=slot_cap)
        extra = {"trial_energies": res.trial_energies}
    else:
        res = solve_multi(inst, eps, seed=seed, trials=trials, slot_cap=slot_cap, backend=backend)
        extra = {"per_processor": {str(p): {"jobs": list(r.jobs), "energy": r.energy,
                                            "preemptive_energy": r.preemptive_energy,
                                            "yds_energy": r.yds_energy, "backend": r.backend}
                                   for p, r in res.processors.items()},
                 "preemptive_energy": res.preemptive_energy, "warnings": res.warnings}
    bounds = experiments.bound_report(inst, float(eps))
    meta = {"energy": res.energy, "lp_objective": res.lp_objective, "ratio": res.ratio,
            "seed": seed, "epsilon": fileio.frac(eps), "slot_cap": slot_cap, "trials": trials,
            "backend": backend if inst.mode == MULTI else PIPELINE, "bound_report": bounds, **extra}
    fileio.write_text(out, fileio.dumps_schedule(res.schedule, inst, meta, fmt))
    # keep stdout clean when the schedule itself goes there
    _print_summary(res.energy, res.lp_objective, bounds, err=out in (None, "-"))


@main.command("verify")
@click.argument("instance_file", type=click.Path(dir_okay=False))
@click.argument("schedule_file", type=click.Path(dir_okay=False))
def verify_cmd(instance_file, schedule_file):
    """Check a schedule file against an instance file."""
    inst = _load_instance(instance_file)
    schedule, digest, _ = fileio.loads_schedule(fileio.read_text(schedule_file))
    if digest != fileio.checksum(inst):
        raise fileio.ChecksumError("schedule was computed for a different instance "
                                   f"(checksum {digest[:12]}..., instance {fileio.checksum(inst)[:12]}...)")
    report = verify(schedule, inst)
    for v in report.violations:
        click.echo(str(v))
    if not report.ok:
        sys.exit(EXIT_VIOLATIONS)
    click.echo("ok")


@main.command()
@click.argument("instance_file", type=click.Path(dir_okay=False))
@click.option("--epsilon", type=click.FloatRange(min=0, min_open=True), default=1.0)
@click.option("--slot-cap", type=click.IntRange(min=1), default=None)
@click.option("--brute-force/--no-brute-force", default=True,
              help="Also run the exhaustive slot-respecting search (tiny instances only).")
def oracle(instance_file, epsilon, slot_cap, brute_force):
    """Print reference energies for a single-mode instance."""
    inst = _load_instance(instance_file)
    if inst.mode != SINGLE:
        raise click.UsageError("oracle needs a single-mode instance")
    click.echo(f"yds_energy    {yds_schedule(inst).energy:.10g}")
    if brute_force:
        eps = Fraction(epsilon).limit_denominator(10 ** 6)
        res = brute_force_single(inst, epsilon=eps, slot_cap=slot_cap)
        click.echo(f"slot_optimum  {res.energy:.10g}")


def _floats(text: str):
    return tuple(float(x) for x in text.split(",") if x.strip())


@main.command()
@click.argument("preset", type=click.Choice(experiments.PRESETS))
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="CSV file (default stdout).")
@click.option("--alphas", default=None, help="Comma-separated alpha values.")
@click.option("--epsilons", default=None, help="Comma-separated epsilon values.")
@click.option("--wratios", default=None, help="Comma-separated w_max/w_min values (table1).")
@click.option("--count", type=click.IntRange(min=1), default=5, help="Instances per grid point.")
@click.option("-n", "--n", "n", type=click.IntRange(min=1), default=5)
@click.option("-m", "--m", "m", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--trials", type=click.IntRange(min=1), default=8)
@click.option("--slot-cap", type=click.IntRange(min=1), default=10)
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=1, help="Worker processes.")
def experiment(preset, out, alphas, epsilons, wratios, count, n, m, seed, trials, slot_cap, jobs):
    """Run an experiment preset and write CSV."""
    if preset == "bell":
        params = {} if alphas is None else {"alphas": _floats(alphas)}
    else:
        params = dict(count=count, n=n, seed=seed, trials=trials, slot_cap=slot_cap, jobs=jobs)
        if alphas is not None:
            params["alphas"] = _floats(alphas)
        if epsilons is not None:
            params["epsilons"] = _floats(epsilons)
        if preset == "table1":
            params["m"] = 2 if m is None else m
            if wratios is not None:
                params["wratios"] = tuple(int(w) for w in _floats(wratios))
        else:
            params["m"] = 1 if m is None else m
    fileio.write_text(out, experiments.to_csv(experiments.run_preset(preset, **params)))


def run(argv=None) -> int:
    """Entry point mapping library errors to exit codes."""
    try:
        main.main(args=argv, prog_name="speedscale", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_FORMAT
    except click.ClickException as exc:
        exc.show()
        return EXIT_FORMAT
    except SystemExit as exc:
        return int(exc.code or 0)
    except fileio.ChecksumError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CHECKSUM
    except fileio.FormatError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_FORMAT
    except InfeasibleError as exc:
        click.echo(f"error: infeasible: {exc}", err=True)
        return EXIT_INFEASIBLE
    except ParameterError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_FORMAT
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_FORMAT
    return EXIT_OK


def entry():
    sys.exit(run())
