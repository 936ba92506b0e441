"""Command line interface: run configs, single checks, the bundled suite and oracles."""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .checks import run_check
from .config import CHECK_IDS, ConfigError, bundled_names, bundled_path, load_config
from .oracles import ORACLES
from .report import EXIT_USAGE, exit_code, report_document, dumps, summary_lines, write_reports

# bundled config used by `check <id>` when --config is not given
DEFAULT_CONFIG = {
    "bowen": "fullshift_phi12", "m1": "fullshift_phi12", "m3": "fullshift_phi12",
    "m2": "bernoulli09", "m4": "bernoulli09", "billing-1": "bernoulli09", "billing-2": "bernoulli09",
    "inequalities": "inequality_suite",
}
SUITE = ("fullshift_phi1", "fullshift_phi12", "fullshift_phi2", "goldenmean_phi1", "bernoulli09",
         "inequality_suite")


def _load(path_or_name: str, seed: int | None):
    path = Path(path_or_name)
    if not path.exists() and path_or_name in bundled_names():
        path = bundled_path(path_or_name)
    cfg = load_config(path)
    return cfg.with_seed(seed) if seed is not None else cfg


def _run_checks(cfg, checks=None) -> list:
    return [run_check(c, cfg) for c in (checks or cfg.checks)]


def _emit(reports, out, cfg_raw, name, figures, started) -> int:
    write_reports(reports, out, cfg_raw, name, figures=figures, started=started)
    for line in summary_lines(reports):
        print(line)
    print(f"report written to {Path(out) / 'report.json'}")
    return exit_code(reports)


def cmd_run(args) -> int:
    started = time.time()
    cfg = _load(args.config, args.seed)
    out = args.out or cfg.raw.get("outputs", {}).get("dir") or f"dimlab_out/{cfg.name}"
    figures = not args.no_figures and cfg.raw.get("outputs", {}).get("figures", True)
    return _emit(_run_checks(cfg), out, cfg.raw, cfg.name, figures, started)


def cmd_check(args) -> int:
    started = time.time()
    cfg = _load(args.config or DEFAULT_CONFIG[args.theorem], args.seed)
    reports = _run_checks(cfg, [args.theorem])
    if args.out:
        return _emit(reports, args.out, cfg.raw, cfg.name, not args.no_figures, started)
    for line in summary_lines(reports):
        print(line)
    if args.json:
        sys.stdout.write(dumps(report_document(reports, cfg.raw, cfg.name)))
    return exit_code(reports)


def cmd_suite(args) -> int:
    started = time.time()
    out = Path(args.out)
    reports, sections = [], []
    for name in SUITE:
        cfg = _load(name, args.seed)
        reps = _run_checks(cfg)
        write_reports(reps, out / name, cfg.raw, name, figures=not args.no_figures, started=started)
        reports.extend(reps)
        sections.append((name, reps))
        print(f"[{name}]")
        for line in summary_lines(reps):
            print("  " + line)
    combined = {"schema_version": None, "suite": []}
    for name, reps in sections:
        doc = report_document(reps, None, name)
        combined["schema_version"] = doc.pop("schema_version")
        combined["suite"].append(doc)
    (out / "report.json").write_text(dumps(combined))
    print(f"suite report written to {out / 'report.json'}")
    return exit_code(reports)


def cmd_oracle(args) -> int:
    if args.name == "list":
        for name, (fn, formula) in ORACLES.items():
            print(f"{name:18s} {fn():.12f}  {formula}")
        return 0
    if args.name not in ORACLES:
        print(f"unknown oracle {args.name!r}; try `dimlab oracle list`", file=sys.stderr)
        return EXIT_USAGE
    fn, formula = ORACLES[args.name]
    print(f"{fn():.12f}  {formula}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimlab", description="Finite-scale BS dimension and pressure experiments")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the checks listed in a config file")
    r.add_argument("config", help="path to a JSON config or the name of a bundled config")
    r.add_argument("--out", help="output directory (default from the config)")
    r.add_argument("--seed", type=int, help="override the config seeds")
    r.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run one checker")
    c.add_argument("theorem", choices=CHECK_IDS)
    c.add_argument("--config", help="config path or bundled name (default depends on the checker)")
    c.add_argument("--seed", type=int)
    c.add_argument("--out", help="write report files here instead of only printing")
    c.add_argument("--json", action="store_true", help="print report.json to stdout")
    c.add_argument("--no-figures", action="store_true")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("suite", help="run every bundled regression config")
    s.add_argument("--out", default="dimlab_suite")
    s.add_argument("--seed", type=int)
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_suite)

    o = sub.add_parser("oracle", help="print an analytic oracle value with its formula")
    o.add_argument("name", help="oracle name, or 'list'")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"dimlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
