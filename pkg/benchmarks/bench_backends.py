"""Compare the compiled fine-sweep kernel against the pure-Python fallback.

    python benchmarks/bench_backends.py [--repeats 5]
"""
import argparse
import statistics
import time

from pararealpy import PararealConfig, kernels, solve_parareal
from pararealpy.problems import get_problem

CASES = [
    ("sin_ty", "euler", "euler", PararealConfig(10, 500, 10, parallel=False)),
    ("sin_ty", "euler", "rk4", PararealConfig(10, 500, 10, parallel=False)),
    ("sin_t_exp_t", "rk4", "rk4", PararealConfig(10, 2000, 3, parallel=False)),
]


def time_case(problem, coarse, fine, cfg, repeats):
    times, result = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = solve_parareal(problem, cfg, coarse, fine)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if not kernels.native_available():
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")

    print(f"{'case':34} {'python s':>10} {'native s':>10} {'ratio':>8}  identical")
    for name, coarse, fine, cfg in CASES:
        problem = get_problem(name).problem()
        with kernels.use_backend("python"):
            t_py, r_py = time_case(problem, coarse, fine, cfg, args.repeats)
        with kernels.use_backend("native"):
            t_nat, r_nat = time_case(problem, coarse, fine, cfg, args.repeats)
        same = r_py.history.y_corr.tobytes() == r_nat.history.y_corr.tobytes()
        label = f"{name} {coarse}/{fine} N{cfg.n_coarse} M{cfg.n_fine} K{cfg.max_iterations}"
        print(f"{label:34} {t_py:10.4f} {t_nat:10.4f} {t_py / t_nat:8.1f}  {same}")


if __name__ == "__main__":
    main()
