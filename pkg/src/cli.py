"""
Command-line frontend.

    analyze      energies, worst-case bound and resilience bound for one task
    sweep        ratio curves over a grid of radii (CSV + JSON)
    verify       closed forms against the brute-force oracles
    paper-repro  analyze + sweep on the bundled underwater-robot configuration
                 (alias: reproduce)

Exit codes: 0 success, 1 invariant or oracle failure, 2 configuration or input error.
"""

import argparse
import json
import logging
import os
from contextlib import contextmanager
from typing import List, Optional, Sequence

from pydantic import ValidationError

from .bruteforce import EnergyFunction, run_oracle_suite
from .energy import malfunctioning_energy, malfunctioning_optimal, nominal_optimal, nominal_report
from .errors import ConfigError, ResilienceError
from .models import AnalysisReport, OracleSummary, RunConfig, SweepResult
from .report_store import ReportStore
from .settings import settings
from .signals import DEFAULT_FREQUENCIES, DEFAULT_PHASES, AdversaryFamily, CatalogEntry, build_catalog
from .simkit import sweep_ratios
from .sysmodel import SystemModel, build_system, build_task
from .worstcase import resilience_lower_bound, worst_case_bound

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

ROBOT_CONFIG = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs', 'underwater_robot.json')
REPRO_COMMAND = 'paper-repro'

SPEC_FAMILIES = {
    "constant": AdversaryFamily.CONSTANT,
    "sinusoid": AdversaryFamily.SINUSOID,
    "piecewise": AdversaryFamily.BANGBANG,
}


def load_run_config(path: str) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    Raises:
        ConfigError: unreadable file (location = path), JSON syntax error
            (location = path:line:column) or schema error (location = dotted field path)
    """
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", location=path)

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, location=f"{path}:{e.lineno}:{e.colno}")

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        problems = []
        for error in e.errors():
            field = ".".join(str(part) for part in error['loc']) or "<root>"
            problems.append(f"{field}: {error['msg']}")
        first = ".".join(str(part) for part in e.errors()[0]['loc']) or "<root>"
        raise ConfigError("; ".join(problems), location=f"{path} [{first}]")


@contextmanager
def tolerance_overrides(config: RunConfig):
    """Apply the config's tolerance section for the duration of a command"""
    previous = settings.override(config.tolerances)
    try:
        yield
    finally:
        settings.override(previous)


def _system(config: RunConfig) -> SystemModel:
    return build_system(config.system.B, config.system.lost_actuators)


def _catalog(config: RunConfig, p: int, t_f: float):
    if config.adversaries:
        return [CatalogEntry(named.label, SPEC_FAMILIES[named.signal.kind], named.signal.to_signal(t_f))
                for named in config.adversaries]
    return build_catalog(p, t_f, config.catalog.families, **config.catalog.params())


def catalog_note(config: RunConfig) -> str:
    """Describe where the adversary set came from"""
    if config.adversaries:
        return f"{len(config.adversaries)} adversaries from the configuration"
    spec = config.catalog
    defaults = tuple(spec.frequencies) == DEFAULT_FREQUENCIES and tuple(spec.phases) == DEFAULT_PHASES
    families = ", ".join(f.value for f in spec.families)
    return (f"catalog families [{families}]; sinusoid frequencies {spec.frequencies} x 2pi/t_f, "
            f"phases {spec.phases}{' (toolkit defaults)' if defaults else ''}; "
            f"bang-bang count {spec.bangbang_count}, switches {spec.bangbang_switches}, seed {spec.seed}")


def _store(config: RunConfig, out_dir: Optional[str]) -> ReportStore:
    return ReportStore(out_dir or config.output.out_dir or settings.out_dir)


def cmd_analyze(config: RunConfig, out_dir: str = None, formats: Sequence[str] = None) -> AnalysisReport:
    """
    Nominal and malfunctioning energies, worst-case bound and resilience bound.

    Raises:
        ConfigError: task.x0 missing
        InfeasibleHorizon: t_f below the nominal minimal horizon (carries min_tf)
    """
    if config.task.x0 is None:
        raise ConfigError("analyze needs task.x0", location="task.x0")
    formats = formats or config.output.formats

    with tolerance_overrides(config):
        sys = _system(config)
        R = config.task.R or 0.0
        task = build_task(config.task.x0, config.task.t_f, R, system=sys)
        nominal_optimal(sys, task)

        report = AnalysisReport(name=config.name)
        if sys.p == 0:
            report.energies.append(nominal_report(sys, task))
            report.notes.append("no lost actuators: nominal analysis only")
        else:
            for entry in _catalog(config, sys.p, task.t_f):
                report.energies.append(malfunctioning_optimal(sys, task, entry.signal, label=entry.label))
            report.worst_case = worst_case_bound(sys, task, config.gram)
            report.notes.append(catalog_note(config))
            if sys.p == 1 and R > 0.0:
                report.resilience = resilience_lower_bound(sys, task.t_f, R, config.gram)
            elif sys.p > 1:
                report.notes.append("resilience bound is only defined for a single lost actuator")
        report.notes.append(f"quadratic term convention: {config.gram}")

    logger.info(f"analyze '{config.name}': {len(report.energies)} energy reports")
    if 'json' in formats:
        _store(config, out_dir).write_json('analysis.json', report, extra={'config': config.model_dump(mode='json')})
    return report


def cmd_sweep(config: RunConfig, out_dir: str = None, formats: Sequence[str] = None,
              threads: int = None) -> SweepResult:
    """Ratio curves over the configured radii, written as sweep.csv / sweep.json"""
    radii = config.task.radii()
    if not radii:
        raise ConfigError("sweep needs task.R, task.R_grid or task.R_range", location="task")
    formats = formats or config.output.formats

    with tolerance_overrides(config):
        sys = _system(config)
        catalog = _catalog(config, sys.p, config.task.t_f) if sys.p >= 1 else None
        result = sweep_ratios(sys, config.task.t_f, radii, config.directions, catalog, config.gram,
                              threads=threads or config.threads, catalog_note=catalog_note(config))

    store = _store(config, out_dir)
    if 'csv' in formats:
        store.write_sweep_csv('sweep.csv', result)
    if 'json' in formats:
        store.write_json('sweep.json', result, extra={'config': config.model_dump(mode='json')})
    return result


def cmd_verify(config: RunConfig, out_dir: str = None, formats: Sequence[str] = None,
               energy_fn: EnergyFunction = malfunctioning_energy) -> OracleSummary:
    """Oracle suite on the configured system plus seeded random systems"""
    formats = formats or config.output.formats
    with tolerance_overrides(config):
        sys = _system(config)
        task = None
        if config.task.x0 is not None:
            task = build_task(config.task.x0, config.task.t_f, system=sys)
        catalog = _catalog(config, sys.p, config.task.t_f) if sys.p >= 1 else None
        audit = run_oracle_suite(sys, task, config.verify, config.search, catalog, config.gram,
                                 energy_fn=energy_fn, name=config.name)
    summary = audit.summary()
    if 'json' in formats:
        _store(config, out_dir).write_json('verify.json', summary, extra={'config': config.model_dump(mode='json')})
    return summary


def apply_seed(config: RunConfig, seed: int) -> RunConfig:
    """Replace every seed in the configuration"""
    return config.model_copy(update={
        'catalog': config.catalog.model_copy(update={'seed': seed}),
        'search': config.search.model_copy(update={'seed': seed}),
        'verify': config.verify.model_copy(update={'seed': seed}),
        'directions': config.directions.model_copy(update={'seed': seed}),
    })


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='energy_resilience',
                                     description='Energetic resilience of driftless linear systems under actuator loss')
    sub = parser.add_subparsers(dest='command', required=True)
    for name, help_text in (('analyze', 'energies and bounds for one initial state'),
                            ('sweep', 'ratio curves over a grid of radii'),
                            ('verify', 'check closed forms against brute-force oracles'),
                            (REPRO_COMMAND, 'analyze and sweep the bundled underwater-robot model')):
        aliases = ['reproduce'] if name == REPRO_COMMAND else []
        cmd = sub.add_parser(name, aliases=aliases, help=help_text)
        cmd.add_argument('--config', required=(name != REPRO_COMMAND), default=None,
                         help='JSON run configuration')
        cmd.add_argument('--out-dir', default=None, help='output directory')
        cmd.add_argument('--format', choices=['csv', 'json'], default=None,
                         help='write only this format (default: formats from the config)')
        cmd.add_argument('--seed', type=int, default=None, help='override every seed in the config')
        cmd.add_argument('--threads', type=int, default=None, help='worker threads for sweeps')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    formats = [args.format] if args.format else None

    try:
        config = load_run_config(args.config or ROBOT_CONFIG)
        if args.seed is not None:
            config = apply_seed(config, args.seed)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1", location="--threads")
            config = config.model_copy(update={'threads': args.threads})

        if args.command == 'analyze':
            cmd_analyze(config, args.out_dir, formats)
            return EXIT_OK

        if args.command == 'verify':
            summary = cmd_verify(config, args.out_dir, formats)
            print(f"{summary.total_checks} checks, {summary.failed_checks} failed")
            for group, deviation in sorted(summary.max_deviation.items()):
                print(f"  {group:<12} max deviation {deviation:.3e}")
            for failure in summary.failures:
                print(f"  FAILED {failure.group}/{failure.name}: {failure.deviation:.3e} > {failure.tolerance:.1e}")
            return EXIT_OK if summary.passed else EXIT_FAILURE

        if args.command in (REPRO_COMMAND, 'reproduce'):
            report = cmd_analyze(config, args.out_dir, formats)
            if report.resilience is not None:
                print(f"resilience lower bound: {report.resilience.lower_bound:.4f}")

        result = cmd_sweep(config, args.out_dir, formats)
        for violation in result.violations:
            print(f"ordering violated at R={violation.R!r}: {violation.curve} "
                  f"({violation.lower!r} > {violation.upper!r})")
        return EXIT_OK if result.ordered else EXIT_FAILURE

    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except ResilienceError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG
