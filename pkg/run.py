"""
run.py

Entry point for slab-certify.

Usage:
    python run.py bound subcritical_n2               # Certificate for problems/subcritical_n2
    python run.py bound --config my_problem.json     # Any problem file
    python run.py verify subcritical_n2 --stress     # Verification suite with c_m halved
    python run.py sharpness --example evanescent_large --params n=2,delta=250
    python run.py sweep evanescent_large_sweep       # Uses the folder's sweep.json
    python run.py kernel n3_two_modes --tolerance kernel.points=50
    python run.py calibrate --dimensions 3 4 5       # Rewrite the constants files
    python run.py --list                             # List all problems and examples

Exit codes: 0 ok, 2 invalid input, 3 no applicable bound, 4 verification failed.
"""

import argparse
import json
import sys
from pathlib import Path

from framework.base_problem import BaseProblem, load_settings, parse_overrides, run_calibrate
from framework.errors import EXIT_INVALID, EXIT_OK, ConfigError, SlabError, exit_code_for
from framework.sharpness import EXAMPLES

PROBLEMS_DIR = Path(__file__).parent / "problems"
COMMANDS = ("bound", "verify", "sharpness", "sweep", "kernel", "calibrate")


def discover_problems() -> dict[str, Path]:
    """Find all problem folders."""
    problems = {}
    if not PROBLEMS_DIR.exists():
        return problems
    for folder in sorted(PROBLEMS_DIR.iterdir()):
        if folder.is_dir() and (folder / "config.json").exists():
            problems[folder.name] = folder
    return problems


def list_problems():
    print("\nAvailable problems:\n")
    for key, path in discover_problems().items():
        cfg = json.loads((path / "config.json").read_text(encoding="utf-8"))
        extra = " [sweep]" if (path / "sweep.json").exists() else ""
        print(f"  {key:28s}  {cfg.get('name', key)}{extra}")
        if cfg.get("description"):
            print(f"        {cfg['description']}")
    print("\nSharpness examples:\n")
    for key, (_, defaults) in EXAMPLES.items():
        params = ",".join(f"{k}={v:g}" for k, v in defaults.items())
        print(f"  {key:28s}  {params}")
    print()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run.py",
        description="slab-certify — uniqueness thresholds for the Schrödinger equation in a slab"
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Pipeline to run")
    parser.add_argument("problem", nargs="?", help="Problem folder under problems/ (e.g. subcritical_n2)")
    parser.add_argument("--config", "-c", type=Path, help="Problem config file instead of a folder name")
    parser.add_argument("--list", "-l", action="store_true", help="List problems and sharpness examples")
    parser.add_argument("--out", "-o", type=Path, help="Output directory (default: <problem>/results)")
    parser.add_argument("--seed", type=int, help="Seed for random trials (default from settings.json)")
    parser.add_argument("--stress", action="store_true", help="verify: halve every c_m (must fail)")
    parser.add_argument("--constants", type=Path, help="Constants file to use instead of the cache")
    parser.add_argument("--tolerance", "-t", action="append", metavar="KEY=VALUE",
                        help="Override settings with dotted keys, e.g. quadrature.rel_tol=1e-12")
    parser.add_argument("--example", help="sharpness: example id (see --list)")
    parser.add_argument("--params", help="sharpness: example parameters, e.g. n=2,delta=50")
    parser.add_argument("--dump", action="store_true", help="sharpness: also write the sampled solution")
    parser.add_argument("--refresh", action="store_true", help="Recalibrate constants even if cached")
    parser.add_argument("--dimensions", type=int, nargs="+", default=[2, 3, 4, 5],
                        help="calibrate: dimensions n to calibrate")
    return parser


def _load(args) -> BaseProblem:
    settings = load_settings()
    if args.config is not None:
        return BaseProblem(config_path=args.config, settings=settings, results_dir=args.out)
    if args.problem is None:
        if args.command == "sharpness" and args.example:
            return _adhoc(args, settings)
        raise ConfigError(f"'{args.command}' needs a problem name or --config")
    problems = discover_problems()
    key = args.problem.lower()
    if key not in problems:
        raise ConfigError(f"problem '{args.problem}' not found. Available: {', '.join(problems) or 'none'}")
    return BaseProblem(problem_dir=problems[key], settings=settings, results_dir=args.out)


def _adhoc(args, settings: dict) -> BaseProblem:
    """sharpness --example without a folder: results go to --out or results/<example>."""
    out = args.out or Path("results") / args.example
    out.mkdir(parents=True, exist_ok=True)
    config_path = out / "config.json"
    config_path.write_text(json.dumps({"name": args.example}, indent=4), encoding="utf-8")
    return BaseProblem(config_path=config_path, settings=settings, results_dir=out)


def dispatch(args) -> int:
    if args.command == "calibrate":
        settings = load_settings()
        overrides = parse_overrides(args.tolerance)
        trials = int(overrides.get("calibration.trials", settings["calibration"]["trials"]))
        seed = args.seed if args.seed is not None else int(settings["seed"])
        constants_dir = settings.get("constants_dir")
        run_calibrate(args.dimensions, trials, seed, Path(constants_dir) if constants_dir else None)
        return EXIT_OK

    problem = _load(args)
    print(f"\nLoading: {problem.name}")
    problem.set_params(parse_overrides(args.tolerance))
    if args.seed is not None:
        problem.set_params({"seed": args.seed})
    problem.stress = args.stress
    problem.refresh = args.refresh
    problem.constants_override = args.constants

    if args.command == "bound":
        problem.run_bound()
    elif args.command == "verify":
        problem.run_verify()
    elif args.command == "sharpness":
        problem.run_sharpness(args.example, args.params, args.dump)
    elif args.command == "sweep":
        problem.run_sweep()
    elif args.command == "kernel":
        problem.run_kernel()
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list or not args.command:
        list_problems()
        if not args.command:
            parser.print_help()
        return EXIT_OK

    try:
        return dispatch(args)
    except SlabError as e:
        code = exit_code_for(e)
        print(f"\n❌ {type(e).__name__}: {e}\n")
        return code
    except (OSError, KeyError) as e:
        print(f"\n❌ {e}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
