"""Compare the compiled and pure-Python rank kernels on real boundary matrices.

    python3 benchmarks/bench_rank.py [--repeat N]

Matrices come from bar complexes and Cech complexes that the test suite
builds; both kernels must agree on every rank.
"""

import argparse
import time

from wittenfact import factalg, homalg, linalg


def workloads():
    yield "bar d_2, Q[x]/x^7", homalg.bar_complex(homalg.truncated_polynomial(1, 6), 2).d(2)
    yield "bar d_2, M2", homalg.bar_complex(homalg.matrix_algebra(2), 2).d(2)
    yield "bar d_3, Q[x]/x^7", homalg.bar_complex(homalg.truncated_polynomial(1, 6), 3).d(3)
    yield "bar d_3, Q[x,y]/deg>2", homalg.bar_complex(homalg.truncated_polynomial(2, 2), 3,
                                                      budget=10 ** 6).d(3)
    cover = factalg.standard_circle_cover(4)
    yield "Cech d_2, M2, 4 arcs", factalg.cech_complex(cover, homalg.matrix_algebra(2), max_degree=1,
                                                     require_factorizing=False).complex.d(2)


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t)
    return value, best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"compiled kernel available: {linalg.BACKEND == 'compiled'}")
    print(f"{'matrix':28} {'shape':>12} {'nnz':>7} {'rank':>6} {'python s':>9} {'compiled s':>10} {'speedup':>8}")
    for label, M in workloads():
        rows = linalg.integer_rows(M.rows.values())
        r_py, t_py = timed(lambda: linalg.rank_python(rows), args.repeat)
        r_c, t_c = timed(lambda: linalg.rank_compiled(rows, M.ncols), args.repeat)
        if r_py != r_c:
            raise SystemExit(f"kernels disagree on {label}: {r_py} != {r_c}")
        shape = f"{M.nrows}x{M.ncols}"
        print(f"{label:28} {shape:>12} {M.nnz():>7} {r_py:>6} {t_py:>9.4f} {t_c:>10.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
