"""
framework/base_problem.py

One certification problem = one folder under problems/ with a config.json.
BaseProblem reads it, merges the global settings.json under it and runs the
pipelines behind every run.py subcommand:

    bound      → certificate.json / certificate.md / modes.csv
    verify     → verification.csv   (VerificationFailed if any row fails)
    sharpness  → tightness.csv (+ sample dumps)
    sweep      → sweep.csv / sweep.svg / summary.md
    kernel     → kernel.csv
    calibrate  → framework/data/constants_n{n}.json

config.json:
    {
        "name": "...", "description": "...",
        "problem":   {"n": 2, "k": 4.93, "support": {"kind": "ball", "radius": 1.0}},
        "verify":    {"trials": 100},
        "sharpness": {"example": "evanescent_large", "params": {"delta": 50}},
        "kernel":    {"m": 1, "r_min": 0.05, "r_max": 20, "points": 200}
    }
"""

import copy
import json
from pathlib import Path
from typing import Optional

import numpy as np

from framework import reporter
from framework.bound_engine import BoundCertificate, GenericConstants, aggregate
from framework.constants_store import calibrate_all, constants_path, get_constants, save_constants
from framework.errors import ConfigError, VerificationFailed
from framework.green_kernel import build_kernel, tabulate_kernel
from framework.sharpness import build_example, dimension_of, parse_params
from framework.special import QuadratureSpec
from framework.spectral_core import ModeClass, ModeWavenumber, SlabProblem, problem_from_dict
from framework.sweeps import SweepSpec, load_sweep, run_sweep
from framework.verifier import explicit_tasks, failures, hardy_littlewood_tasks, problem_tasks, run_tasks, summarize

ROOT = Path(__file__).resolve().parent.parent
SETTINGS_PATH = ROOT / "settings.json"

DEFAULT_SETTINGS = {
    "seed": 20240607,
    "workers": 1,
    "resonance_tolerance": 1e-9,
    "quadrature": {"rel_tol": 1e-10, "abs_tol": 1e-14, "max_subdivisions": 200},
    "verify": {"trials": 100, "hardy_littlewood_trials": 1000, "hardy_littlewood_trials_2d": 200,
               "explicit_suite": True},
    "calibration": {"trials": 40},
    "kernel": {"m": 1, "r_min": 0.05, "r_max": 20.0, "points": 200},
    "constants_dir": None,
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_settings(path: Optional[Path] = None) -> dict:
    """settings.json "defaults" over the built-in defaults."""
    path = Path(path or SETTINGS_PATH)
    if not path.exists():
        return copy.deepcopy(DEFAULT_SETTINGS)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return _merge(DEFAULT_SETTINGS, data.get("defaults", {}))


def parse_overrides(items: Optional[list]) -> dict:
    """["verify.trials=10", "quadrature.rel_tol=1e-12"] → {"verify.trials": 10, ...}."""
    out = {}
    for item in items or []:
        for part in filter(None, (p.strip() for p in item.split(","))):
            key, sep, value = part.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"override '{part}' is not key=value")
            try:
                out[key.strip()] = json.loads(value)
            except json.JSONDecodeError:
                out[key.strip()] = value.strip()
    return out


class BaseProblem:
    """
    A problem folder (or a bare config file) plus the settings it runs with.
    Library calls never print; everything the user sees is printed here.
    """

    def __init__(self, problem_dir: Optional[Path] = None, config_path: Optional[Path] = None,
                 settings: Optional[dict] = None, results_dir: Optional[Path] = None):
        if problem_dir is None and config_path is None:
            raise ConfigError("need a problem folder or a config file")
        if config_path is None:
            config_path = Path(problem_dir) / "config.json"
        config_path = Path(config_path)
        if not config_path.exists():
            raise ConfigError(f"config.json not found: {config_path}")
        try:
            self.config = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{config_path}: {e}") from e
        if not isinstance(self.config, dict):
            raise ConfigError(f"{config_path}: expected a JSON object")

        self.problem_dir = Path(problem_dir) if problem_dir else config_path.parent
        default_results = (self.problem_dir / "results" if problem_dir
                           else config_path.parent / "results" / config_path.stem)
        self.results_dir = Path(results_dir) if results_dir else default_results

        self.name = self.config.get("name", self.problem_dir.name if problem_dir else config_path.stem)
        self.description = self.config.get("description", "")
        self.settings = _merge(settings if settings is not None else load_settings(),
                               {key: self.config[key] for key in ("verify", "kernel") if key in self.config})

        # set by run.py before a pipeline runs
        self.stress: bool = False
        self.refresh: bool = False
        self.constants_override: Optional[Path] = None
        self.constant_values: dict = {}

    # ── parameters ──

    @property
    def seed(self) -> int:
        return int(self.settings["seed"])

    @property
    def workers(self) -> int:
        return max(1, int(self.settings["workers"]))

    @property
    def quadrature(self) -> QuadratureSpec:
        q = self.settings["quadrature"]
        return QuadratureSpec(rel_tol=float(q["rel_tol"]), abs_tol=float(q["abs_tol"]),
                              max_subdivisions=int(q["max_subdivisions"]))

    def set_params(self, params: dict):
        """
        Update settings or the problem from flat or dotted keys:
            seed, workers, verify.trials, quadrature.rel_tol, problem.k,
            problem.support.radius, C_agmon (and the other constants)
        """
        for key, value in params.items():
            head, *rest = key.split(".")
            if head == "problem":
                target = self.config if "n" in self.config else self.config.setdefault("problem", {})
            elif head.startswith("C_"):
                self.constant_values[head] = float(value)
                continue
            elif head in self.settings:
                if not rest:
                    self.settings[head] = value
                    continue
                target = self.settings[head]
            else:
                raise ConfigError(f"unknown parameter '{key}'")
            for part in rest[:-1]:
                target = target.setdefault(part, {})
            if not isinstance(target, dict) or not rest:
                raise ConfigError(f"'{key}' does not name a setting")
            target[rest[-1]] = value

    @property
    def problem(self) -> SlabProblem:
        data = self.config.get("problem", self.config if "n" in self.config else None)
        if data is None:
            raise ConfigError(f"{self.name}: config has no 'problem' section")
        data = {"resonance_tolerance": self.settings["resonance_tolerance"], **data}
        return problem_from_dict(data)

    def constants(self, n: int) -> tuple[GenericConstants, str]:
        settings_dir = self.settings.get("constants_dir")
        C, digest = get_constants(
            n,
            trials=int(self.settings["calibration"]["trials"]),
            seed=self.seed,
            constants_dir=Path(settings_dir) if settings_dir else None,
            refresh=self.refresh,
            override=self.constants_override,
        )
        if self.constant_values:
            C = C.with_overrides(self.constant_values)
        return C, digest

    def _header(self, command: str, detail: str = ""):
        print(f"\n{'='*60}")
        print(f"  {self.name}")
        if self.description:
            print(f"  {self.description}")
        print(f"  Command: {command}{'   ' + detail if detail else ''}")
        print(f"  Seed:    {self.seed} | Workers: {self.workers}")
        print(f"{'='*60}\n")

    def _done(self):
        print(f"\n✅ Done. Results saved to: {self.results_dir}/\n")

    @staticmethod
    def _describe(problem: SlabProblem) -> str:
        support = f"ball ρ={problem.radius:g}" if problem.radius is not None else "measure only"
        return f"n={problem.n}, k={problem.k:.6g}, |I|={problem.measure:.6g} ({support})"

    # ── pipelines ──

    def run_bound(self) -> BoundCertificate:
        problem = self.problem
        self._header("bound", self._describe(problem))
        print(f"  [Config] {self._describe(problem)}")
        C, digest = self.constants(problem.n)
        certificate = aggregate(problem, C)
        for b in certificate.modes:
            print(f"  [Bound] m={b.m:<3} c_m = {b.c_m:.6g}  ({b.source})")
        reporter.write_certificate(certificate, self.results_dir, self.name, digest)
        reporter.print_certificate_summary(self.name, certificate)
        print(f"\n  threshold = {certificate.threshold:.6g}")
        self._done()
        return certificate

    def run_verify(self) -> list:
        """Writes verification.csv, then raises VerificationFailed if any row failed."""
        problem = self.problem
        v = self.settings["verify"]
        trials = int(v["trials"])
        if trials < 1:
            raise ConfigError(f"verify.trials must be ≥ 1, got {trials}")
        self._header("verify", self._describe(problem) + (" [stress: c_m/2]" if self.stress else ""))
        C, digest = self.constants(problem.n)

        tasks = problem_tasks(problem, C, trials, self.seed, self.stress)
        print(f"  [Verify] problem suite: {len(tasks)} random sources")
        if problem.n == 2 and v.get("explicit_suite", True):
            explicit = explicit_tasks(int(v.get("explicit_trials", 100)), self.seed + 1, self.stress)
            print(f"  [Verify] explicit-constant suite: {len(explicit)} random sources")
            tasks += explicit
        hl = hardy_littlewood_tasks(int(v["hardy_littlewood_trials"]), int(v["hardy_littlewood_trials_2d"]),
                                    self.seed + 2)
        if hl:
            print(f"  [Verify] Hardy–Littlewood suite: {len(hl)} random triples")
        tasks += hl

        results = run_tasks(tasks, self.workers)
        reporter.write_verification(results, self.results_dir)
        reporter.print_verification_summary(self.name, summarize(results))
        failed = failures(results)
        if failed:
            worst = min(failed, key=lambda r: r.margin / max(r.rhs, 1e-300))
            raise VerificationFailed(
                f"{len(failed)} of {len(results)} checks failed; worst: {worst.lemma} m={worst.m} "
                f"lhs={worst.lhs:.6g} > rhs={worst.rhs:.6g}"
            )
        print(f"  [Verify] all {len(results)} checks passed (constants sha256 {digest[:12]})")
        self._done()
        return results

    def _sharpness_runs(self, example: Optional[str], params: Optional[str]) -> list:
        if example:
            return [(example, parse_params(params))]
        section = self.config.get("sharpness", {})
        runs = section.get("runs") or ([section] if "example" in section else [])
        if not runs:
            raise ConfigError(f"{self.name}: no sharpness example (use --example or a 'sharpness' section)")
        out = []
        for run in runs:
            if "example" not in run:
                raise ConfigError("every sharpness run needs an 'example'")
            extra = {key: float(value) for key, value in run.get("params", {}).items()}
            if params:
                extra.update(parse_params(params))
            out.append((run["example"], extra))
        return out

    def run_sharpness(self, example: Optional[str] = None, params: Optional[str] = None,
                      dump: bool = False) -> list:
        runs = self._sharpness_runs(example, params)
        self._header("sharpness", ", ".join(r[0] for r in runs))
        reports = []
        for example_id, extra in runs:
            C, _ = self.constants(dimension_of(example_id, extra))
            print(f"  [Sharpness] building {example_id} {extra or ''}")
            solution, report = build_example(example_id, extra, C)
            if solution.residual is not None:
                print(f"  [Sharpness]   residual {solution.residual.max_residual:.3g} "
                      f"({solution.residual.excluded} interface nodes excluded)")
            reports.append(report)
            if dump:
                reporter.write_dump(solution, self.results_dir)
        reporter.write_tightness(reports, self.results_dir)
        self._done()
        return reports

    def sweep_spec(self) -> SweepSpec:
        path = self.problem_dir / "sweep.json"
        if "sweep" in self.config:
            return SweepSpec.from_dict(self.config["sweep"])
        if path.exists():
            return load_sweep(path)
        raise ConfigError(f"{self.name}: no sweep.json and no 'sweep' section")

    def run_sweep(self, spec: Optional[SweepSpec] = None):
        spec = spec or self.sweep_spec()
        self._header("sweep", f"{spec.target} over {spec.parameter} "
                              f"{spec.start:g} → {spec.stop:g} ({spec.points} pts, {spec.scale})")
        problem = self.problem if spec.is_bound else None
        n = problem.n if problem else dimension_of(spec.target, {**spec.params, spec.parameter: spec.start})
        C, digest = self.constants(n)
        print(f"  [Sweep] {spec.points} points on {self.workers} worker(s)...", flush=True)
        df = run_sweep(spec, C, problem, self.workers)
        trend = reporter.write_sweep(df, spec, self.results_dir, self.name, digest)
        reporter.print_sweep_summary(self.name, spec, df, trend)
        self._done()
        return df

    def kernel_mode(self) -> tuple[int, ModeWavenumber, Optional[float]]:
        """(n, k_m, ρ) from the 'kernel' settings, or mode m of the problem."""
        k = self.settings["kernel"]
        if "k_m" in k:
            kind = ModeClass(k.get("class", "propagating"))
            modulus = float(k["k_m"])
            value = {ModeClass.PROPAGATING: complex(modulus, 0.0),
                     ModeClass.EVANESCENT: complex(0.0, modulus),
                     ModeClass.RESONANT: 0j}[kind]
            return int(k.get("n", 2)), ModeWavenumber(int(k.get("m", 1)), value, kind), k.get("rho")
        problem = self.problem
        return problem.n, problem.mode(int(k["m"])), problem.radius

    def run_kernel(self):
        n, k_m, rho = self.kernel_mode()
        k = self.settings["kernel"]
        self._header("kernel", f"n={n}, k_{k_m.m}={k_m.value:.6g} ({k_m.kind.value})")
        r_min, r_max, points = float(k["r_min"]), float(k["r_max"]), int(k["points"])
        if not (0 < r_min < r_max) or points < 2:
            raise ConfigError(f"kernel radii need 0 < r_min < r_max and points ≥ 2, "
                              f"got {r_min}, {r_max}, {points}")
        kernel = build_kernel(n, k_m, rho=rho, quadrature=self.quadrature)
        print(f"  [Kernel] {kernel!r} on {points} radii in [{r_min:g}, {r_max:g}]")
        table = tabulate_kernel(kernel, np.geomspace(r_min, r_max, points))
        reporter.write_kernel_table(table, self.results_dir)
        self._done()
        return table


def run_calibrate(dimensions: list, trials: int, seed: int, constants_dir: Optional[Path] = None) -> dict:
    """Recalibrate and rewrite the constants file of every dimension. Returns {n: sha256}."""
    print(f"\n{'='*60}")
    print("  Calibration of the generic constants")
    print(f"  Dimensions: {dimensions} | Trials: {trials} | Seed: {seed}")
    print(f"{'='*60}\n")
    if trials < 1:
        raise ConfigError(f"calibration trials must be ≥ 1, got {trials}")
    if not dimensions:
        raise ConfigError("no dimension to calibrate")
    hashes = {}
    for n in dimensions:
        C, meta = calibrate_all(n, trials, seed)
        path = constants_path(n, constants_dir)
        hashes[n] = save_constants(C, meta, path)
        print(f"  [Saved] {path} (sha256 {hashes[n][:12]})")
    print(f"\n✅ Done. Constants saved to: {constants_path(dimensions[0], constants_dir).parent}/\n")
    return hashes
