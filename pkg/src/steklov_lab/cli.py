"""Command-line interface: ``steklov-lab {run,sweep,preset,validate,oracle}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .boundary_modes import berger_oracle, write_oracle_csv
from .errors import ConfigurationError, DomainError, SteklovLabError
from .experiments import (
    PRESET_NAMES,
    ResultTable,
    ScenarioConfig,
    emit_certificates,
    emit_csv,
    emit_ratio_csv,
    emit_report_json,
    emit_svg,
    preset,
    quasi_isometry_trials,
    run_scenario,
    sweep,
)

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


def _output_paths(config: ScenarioConfig, out: str | None) -> dict[str, Path]:
    """``--out`` wins; otherwise the config's ``output`` entries, then ``<name>.*`` in the cwd."""
    stem = Path(out) / config.name if out is not None else Path(config.name)
    paths = {
        "csv": stem.with_suffix(".csv"),
        "svg": stem.with_suffix(".svg"),
        "certificates": Path(f"{stem}.certificates.json"),
        "json": stem.with_suffix(".json"),
    }
    if out is None:
        paths.update({k: Path(v) for k, v in config.output.items()})
    for p in paths.values():
        p.parent.mkdir(parents=True, exist_ok=True)
    return paths


def _write_table(table: ResultTable, config: ScenarioConfig, out: str | None) -> int:
    paths = _output_paths(config, out)
    emit_csv(table, paths["csv"])
    emit_svg(table, paths["svg"])
    emit_certificates(table, paths["certificates"])
    for r in table.rows:
        mark = "ok" if r.holds else "VIOLATED"
        print(
            f"eps={r.epsilon:<8g} sigma_{r.k}={r.sigma_k:<14.8g} {r.certificate_kind:<16} "
            f"bound={r.certificate_bound:<12.6g} {mark}"
        )
    print(f"wrote {paths['csv']}, {paths['svg']}, {paths['certificates']}")
    return EXIT_OK if table.all_hold else EXIT_VIOLATION


def _run_fem(config: ScenarioConfig, out: str | None) -> int:
    paths = _output_paths(config, out)
    report = quasi_isometry_trials(config)
    emit_report_json(report, paths["json"])
    emit_ratio_csv(report, paths["csv"])
    for t in report["trials"]:
        print(
            f"trial {t['trial']:2d} A={t['A']:.4f} ratios in [{min(t['ratios']):.4f}, {max(t['ratios']):.4f}] "
            f"{'ok' if t['pass'] else 'VIOLATED'}"
        )
    print(f"wrote {paths['json']}, {paths['csv']}")
    return EXIT_OK if report["pass"] else EXIT_VIOLATION


def _execute(config: ScenarioConfig, out: str | None, single: float | None = None, whole: bool = True) -> int:
    if config.solver == "fem":
        return _run_fem(config, out)
    table = sweep(config) if whole else run_scenario(config, single)
    return _write_table(table, config, out)


def cmd_run(args) -> int:
    config = ScenarioConfig.load(args.config)
    return _execute(config, args.out, single=args.epsilon, whole=False)


def cmd_sweep(args) -> int:
    config = ScenarioConfig.load(args.config)
    return _execute(config, args.out)


def cmd_preset(args) -> int:
    if args.list:
        print("\n".join(PRESET_NAMES))
        return EXIT_OK
    if args.name is None:
        raise ConfigurationError("give a preset name or --list")
    config = preset(args.name, args.epsilon_grid)
    return _execute(config, args.out)


def cmd_validate(args) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(args.criterion or None, out=sys.stdout)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    if args.family != "berger":
        raise ConfigurationError(f"no oracle for {args.family!r}")
    if not 0 <= args.kmax <= 8:
        raise DomainError("kmax must lie in [0, 8]")
    rows = berger_oracle(args.kmax)
    if args.out:
        write_oracle_csv(rows, args.out)
        print(f"wrote {args.out}")
    else:
        print("k,m,multiplicity,mu1")
        for k, m, mult, mu in rows:
            print(f"{k},{m},{mult},{mu:.12e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steklov-lab", description="Steklov spectra of deformed collars.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a JSON scenario at a single epsilon")
    p.add_argument("config")
    p.add_argument("--epsilon", type=float, help="default: first value of the sweep")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a JSON scenario over its epsilon grid")
    p.add_argument("config")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("preset", help="run a built-in scenario")
    p.add_argument("name", nargs="?", choices=PRESET_NAMES)
    p.add_argument("--epsilon-grid", type=float, nargs="+", metavar="EPS")
    p.add_argument("--out", help="output directory")
    p.add_argument("--list", action="store_true", help="list preset names")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("criterion", type=int, nargs="*", help="criterion numbers (default: all)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="print a closed-form oracle table")
    p.add_argument("family", choices=["berger"])
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SteklovLabError as exc:
        print(f"steklov-lab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"steklov-lab: cannot write output: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
