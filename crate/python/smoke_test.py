"""Smoke test for the Python extension.

Build and run from the repository root:

    cargo build --release -p tensor-derivs-py --features extension-module
    cp target/release/libtensor_derivs_py.so python/tensor_derivs_py.so
    python3 python/smoke_test.py
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import tensor_derivs_py as td

A = [[2.0, 0.5, 0.0], [0.5, 1.5, 0.2], [0.0, 0.2, 1.0]]
X = [[0.1, 0.02, 0.0], [0.02, -0.05, 0.01], [0.0, 0.01, 0.03]]
I = [[1.0 if i == j else 0.0 for j in range(3)] for i in range(3)]


def norm(m):
    return math.sqrt(sum(v * v for row in m for v in row))


def sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def main():
    s = td.Spectrum(A)
    assert s.d == 3
    assert norm(sub(s.reconstruct(), A)) < 1e-12
    assert abs(sum(s.alphas) - 4.5) < 1e-12

    root = s.apply("sqrt")
    assert norm(sub(matmul(root, root), A)) < 1e-12

    # polynomial Taylor series terminates
    exact = td.Spectrum([[A[i][j] + X[i][j] for j in range(3)] for i in range(3)]).apply("monomial:3")
    assert norm(sub(td.taylor("monomial:3", A, X, 3), exact)) < 1e-12

    # gradient of exp at the identity is e times the identity map
    g = td.gradient("exp", I)
    assert all(abs(g[r][c] - (math.e if r == c else 0.0)) < 1e-12 for r in range(9) for c in range(9))

    d = td.Derivative("log", A, 2)
    assert d.order == 2
    assert len(d.dense()) == 3 ** 6
    assert all(len(k) == 3 for k in d.coefficients())
    act = d.action([X, X])
    assert norm(sub(act, [[2 * v for v in row] for row in d.contract([X, X])])) < 1e-12

    assert td.count_classes(3) == (4, 4)
    c = td.coefficient("exp", [(1.0, 3)])
    assert abs(c - math.e / 2) < 1e-12

    gi = td.inverse_gradient("log", A)
    gl = td.gradient("log", A)
    prod = [[sum(gl[i][k] * gi[k][j] for k in range(9)) for j in range(9)] for i in range(9)]
    assert all(abs(prod[i][j] - (1.0 if i == j else 0.0)) < 1e-10 for i in range(9) for j in range(9))

    C = [[1.0, 0.3, 0.0], [0.3, 2.0, 0.1], [0.0, 0.1, 0.5]]
    x2 = td.solve_power(2, A, C)
    assert norm(sub([[p + q for p, q in zip(r1, r2)] for r1, r2 in zip(matmul(A, x2), matmul(x2, A))], C)) < 1e-11

    Y = sub(matmul(A, X), matmul(X, A))
    xc, null = td.solve_commutator(A, Y)
    assert norm(sub(sub(matmul(A, xc), matmul(xc, A)), Y)) < 1e-10
    assert null < 1e-10

    xl = td.solve_log(A, C)
    back = [[sum(gl[3 * i + j][k] * xl[k // 3][k % 3] for k in range(9)) for j in range(3)] for i in range(3)]
    assert norm(sub(back, C)) < 1e-8

    for bad in (lambda: td.Spectrum([[1, 2, 0], [0, 1, 0], [0, 0, 1]]),
                lambda: td.gradient("nope", A),
                lambda: td.Derivative("log", [[-1, 0, 0], [0, 1, 0], [0, 0, 1]], 1)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("smoke test ok")


if __name__ == "__main__":
    main()
