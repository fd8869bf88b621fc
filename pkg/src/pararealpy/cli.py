"""Command-line front end: ``solve``, ``simulate``, ``bench`` and ``catalog``.

Settings are layered: command-line flags override ``--config`` JSON values,
which override the problem's catalog defaults. Every name is resolved and
every count validated before any computation or file output.

Exit codes: 0 success, 2 validation error, 3 numerical blow-up, 4 I/O error.
Failures print one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import statistics
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .core import NumericalBlowupError, ValidationError, _check_count
from .diagnostics import (ReferenceSolution, boundary_errors, emit_frames,
                          record_simulation)
from .diagnostics.frames import fmt_float
from .integrators import get_integrator, integrator_registry, with_delay
from .parareal import PararealConfig, solve_parareal
from .problems import get_problem, problem_registry

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


@dataclass
class RunConfig:
    problem: str = "sin_ty"
    coarse: str = "euler"
    fine: str = "euler"
    n_coarse: int = 10
    n_fine: int = 500
    iterations: int = 10
    tolerance: Optional[float] = None
    parallel: bool = True
    seed: int = 0
    workers: Optional[int] = None
    backend: Optional[str] = None
    out: Optional[str] = None
    report: Optional[str] = None
    out_dir: Optional[str] = None
    format: str = "csv"
    max_chunk: Optional[int] = None
    show_prev: bool = True
    delay_ms: float = 0.0
    repeats: int = 5
    extra: dict = field(default_factory=dict, repr=False)

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        return d


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)} - {"extra"}


def _load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError("config", f"{path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError("config", "config file must hold a JSON object")
    unknown = set(data) - _FIELDS
    if unknown:
        raise ValidationError("config", f"unknown keys {sorted(unknown)}")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge catalog defaults, config file and flags, then validate."""
    flags = {k: v for k, v in vars(args).items() if k in _FIELDS and v is not None}
    from_file = _load_config_file(args.config) if getattr(args, "config", None) else {}
    name = flags.get("problem", from_file.get("problem", RunConfig.problem))
    spec = get_problem(name)
    merged = {**spec.defaults, **from_file, **flags, "problem": spec.name}
    cfg = RunConfig(**merged)

    get_integrator(cfg.coarse)
    get_integrator(cfg.fine)
    for f in ("n_coarse", "n_fine", "iterations"):
        setattr(cfg, f, _check_count(getattr(cfg, f), f))
    if cfg.workers is not None:
        cfg.workers = _check_count(cfg.workers, "workers")
    if cfg.max_chunk is not None:
        cfg.max_chunk = _check_count(cfg.max_chunk, "max_chunk")
    if cfg.tolerance is not None and not float(cfg.tolerance) >= 0:
        raise ValidationError("tolerance", f"must be >= 0, got {cfg.tolerance}")
    if not (isinstance(cfg.seed, int) and 0 <= cfg.seed < 2 ** 64):
        raise ValidationError("seed", f"must be an unsigned 64-bit integer, got {cfg.seed!r}")
    if cfg.format not in ("csv", "svg"):
        raise ValidationError("format", f"must be csv or svg, got {cfg.format!r}")
    if not float(cfg.delay_ms) >= 0:
        raise ValidationError("delay_ms", f"must be >= 0, got {cfg.delay_ms}")
    if isinstance(cfg.repeats, bool) or int(cfg.repeats) != cfg.repeats or cfg.repeats < 1:
        raise ValidationError("repeats", f"must be an integer >= 1, got {cfg.repeats!r}")
    if cfg.backend is not None and cfg.backend not in kernels.BACKENDS:
        raise ValidationError("backend", f"must be one of {kernels.BACKENDS}")
    if cfg.backend == "native" and not kernels.native_available():
        raise ValidationError("backend", "compiled kernel is not available")
    return cfg


def _parareal_config(cfg: RunConfig, parallel=None, keep_history=True) -> PararealConfig:
    return PararealConfig(cfg.n_coarse, cfg.n_fine, cfg.iterations,
                          stop_tolerance=cfg.tolerance,
                          parallel=cfg.parallel if parallel is None else parallel,
                          keep_history=keep_history, workers=cfg.workers)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def solution_csv(trajectory) -> str:
    d = trajectory.values.shape[1]
    lines = [",".join(["t"] + [f"y_{j}" for j in range(d)])]
    for t, row in zip(trajectory.times.tolist(), trajectory.values.tolist()):
        lines.append(",".join([fmt_float(t)] + [fmt_float(v) for v in row]))
    return "\n".join(lines) + "\n"


def _backend_ctx(cfg):
    if cfg.backend is None:
        return _nullctx()
    return kernels.use_backend(cfg.backend)


class _nullctx:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


def cmd_solve(cfg: RunConfig) -> int:
    spec = get_problem(cfg.problem)
    problem = spec.problem()
    out = Path(cfg.out or "solution.csv")
    report_path = Path(cfg.report) if cfg.report else out.with_suffix(".report.json")
    with _backend_ctx(cfg):
        result = solve_parareal(problem, _parareal_config(cfg), cfg.coarse, cfg.fine)
        ref = ReferenceSolution.sequential_fine(problem, cfg.fine, cfg.n_coarse, cfg.n_fine)
        backend = kernels.get_backend()
    errors = boundary_errors(result, ref)
    report = {
        "config": cfg.echo(),
        "backend": backend,
        "iterations_run": result.iterations_run,
        "increments": result.increments,
        "wall_times_s": result.wall_times,
        "reference": ref.kind,
        "errors": errors.to_dict(),
    }
    _atomic_write(out, solution_csv(result.trajectory))
    _atomic_write(report_path, json.dumps(report, indent=2) + "\n")
    print(f"wrote {out} ({len(result.trajectory)} rows) and {report_path}; "
          f"iterations_run={result.iterations_run}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    problem = get_problem(cfg.problem).problem()
    out_dir = Path(cfg.out_dir or "frames")
    with _backend_ctx(cfg):
        trace = record_simulation(problem, _parareal_config(cfg), cfg.coarse, cfg.fine,
                                  cfg.seed, cfg.max_chunk or cfg.n_fine,
                                  show_prev=cfg.show_prev)
    paths = emit_frames(trace, out_dir, cfg.format)
    print(f"{len(paths)} frames written to {out_dir}")
    return EXIT_OK


def run_bench(cfg: RunConfig) -> dict:
    """Time the fine stage serially and in parallel; check outputs agree bitwise."""
    problem = get_problem(cfg.problem).problem()
    fine = with_delay(cfg.fine, cfg.delay_ms / 1e3)
    timings = {"serial": [], "parallel": []}
    outputs = {}
    with _backend_ctx(cfg):
        for _ in range(cfg.repeats):
            for mode in ("serial", "parallel"):
                res = solve_parareal(problem, _parareal_config(cfg, parallel=mode == "parallel"),
                                     cfg.coarse, fine)
                timings[mode].append(sum(res.wall_times))
                outputs[mode] = res
        backend = kernels.get_backend() if fine.kernel_id is not None else "python"
    s, p = outputs["serial"], outputs["parallel"]
    identical = (np.array_equal(s.trajectory.values, p.trajectory.values)
                 and np.array_equal(s.history.y_corr, p.history.y_corr)
                 and s.increments == p.increments)
    med_s = statistics.median(timings["serial"])
    med_p = statistics.median(timings["parallel"])
    report = {
        "config": cfg.echo(),
        "backend": backend,
        "workers": cfg.workers or min(cfg.n_coarse, 64),
        "fine_stage_s": timings,
        "median_serial_s": med_s,
        "median_parallel_s": med_p,
        "speedup": med_s / med_p if med_p > 0 else None,
        "bitwise_identical": identical,
    }
    if cfg.delay_ms == 0:
        report["note"] = ("no injected cost: a speedup near 1 is expected, the fine "
                          "stage is too cheap for threading to pay off")
    return report


def cmd_bench(cfg: RunConfig) -> int:
    report = run_bench(cfg)
    text = json.dumps(report, indent=2) + "\n"
    if cfg.out:
        _atomic_write(cfg.out, text)
    sys.stdout.write(text)
    if not report["bitwise_identical"]:
        _fail("numeric", "serial and parallel runs differ")
        return EXIT_NUMERIC
    return EXIT_OK


def catalog_dict() -> dict:
    return {
        "problems": [
            {"name": p.name, "interval": [p.a, p.b], "y0": list(p.y0),
             "closed_form": p.closed_form is not None, "description": p.description}
            for p in problem_registry().values()
        ],
        "integrators": [
            {"name": i.name, "description": i.description, "native": i.kernel_id is not None}
            for i in integrator_registry().values()
        ],
        "backend": kernels.get_backend(),
    }


def cmd_catalog(as_json: bool = False) -> int:
    cat = catalog_dict()
    if as_json:
        print(json.dumps(cat, indent=2))
        return EXIT_OK
    print("problems:")
    for p in cat["problems"]:
        print(f"  {p['name']:<14} [{p['interval'][0]:g}, {p['interval'][1]:g}]  {p['description']}")
    print("integrators:")
    for i in cat["integrators"]:
        print(f"  {i['name']:<14} {i['description']}")
    print(f"backend: {cat['backend']}")
    return EXIT_OK


def _fail(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("run configuration")
    g.add_argument("--problem")
    g.add_argument("--coarse")
    g.add_argument("--fine")
    g.add_argument("-N", "--n-coarse", dest="n_coarse", type=int)
    g.add_argument("-M", "--n-fine", dest="n_fine", type=int)
    g.add_argument("-K", "--iterations", type=int)
    g.add_argument("--tolerance", type=float)
    g.add_argument("--parallel", dest="parallel", action="store_true", default=None)
    g.add_argument("--no-parallel", dest="parallel", action="store_false")
    g.add_argument("--workers", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--backend", choices=kernels.BACKENDS)
    g.add_argument("--config", metavar="FILE", help="JSON file with RunConfig fields")
    g.add_argument("--out")
    g.add_argument("--json", action="store_true")

    parser = argparse.ArgumentParser(prog="pararealpy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[shared], help="run parareal, write CSV + report")
    p.add_argument("--report", help="report JSON path (default: <out>.report.json)")

    p = sub.add_parser("simulate", parents=[shared], help="emit a seeded frame sequence")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--format", choices=("csv", "svg"))
    p.add_argument("--max-chunk", dest="max_chunk", type=int)
    p.add_argument("--show-prev", dest="show_prev", action="store_true", default=None)
    p.add_argument("--no-show-prev", dest="show_prev", action="store_false")

    p = sub.add_parser("bench", parents=[shared], help="serial vs parallel fine-stage timing")
    p.add_argument("--delay-ms", dest="delay_ms", type=float)
    p.add_argument("--repeats", type=int)

    sub.add_parser("catalog", parents=[shared], help="list problems and integrators")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            return cmd_catalog(args.json)
        cfg = resolve_config(args)
        return {"solve": cmd_solve, "simulate": cmd_simulate, "bench": cmd_bench}[args.command](cfg)
    except ValidationError as exc:
        _fail("validation", exc.message, field=exc.field)
        return EXIT_VALIDATION
    except NumericalBlowupError as exc:
        _fail("numeric", str(exc), iteration=exc.iteration, subdomain=exc.subdomain,
              step=exc.step, stage=exc.stage)
        return EXIT_NUMERIC
    except OSError as exc:
        _fail("io", str(exc))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
