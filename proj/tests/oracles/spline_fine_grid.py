"""Fine-grid discretisation of the reference spline fit.

g is sampled at step h0/1000 on [k0-h0, k0+h0] and described by its second
differences u_i = (g_{i+1} - 2 g_i + g_{i-1}) / dx^2 at the interior grid
points, with g_0 = g_1 = 0 (value and slope zero at the left end). The
roughness integral is a Riemann sum. Between the N+1 fit knots u is forced to
be affine (the cubic-spline class) and u = 0 at both ends. Prints g(k0) for
N = 4 and N = 10; the values are frozen in test_smoothers.cpp.
"""
import cvxpy as cp
import numpy as np


def fine_grid_value(N, h0=10.0, k0=100.0, per_h=1000):
    n = 2 * per_h
    dx = h0 / per_h
    x = k0 - h0 + dx * np.arange(n + 1)
    u = cp.Variable(n - 1)  # at x[1..n-1]
    pts = np.arange(1, n)

    def g_at(j):
        # g_j = sum_{i<j} (j - i) dx^2 u_i
        w = np.where(pts < j, (j - pts) * dx * dx, 0.0)
        return w @ u

    step = n // N
    knots = np.arange(0, n + 1, step)
    cons = [u >= 0, u[0] == 0, u[n - 2] == 0,
            g_at(n) == h0, dx * cp.sum(u) == 1]
    for a in knots[:-1]:
        idx = np.arange(max(a, 1), min(a + step, n - 1) + 1)
        v = u[idx - 1]
        cons.append(v[2:] - 2 * v[1:-1] + v[:-2] == 0)
    lam = (0.1 * h0) ** 3
    G = np.array([[((j - i) * dx * dx if i < j else 0.0) for i in pts] for j in knots])
    target = np.maximum(x[knots] - k0, 0.0)
    obj = cp.sum_squares(target - G @ u) + lam * dx * cp.sum_squares(u)
    cp.Problem(cp.Minimize(obj), cons).solve(solver="CLARABEL")
    return float(np.where(pts < per_h, (per_h - pts) * dx * dx, 0.0) @ u.value)


if __name__ == "__main__":
    for N in (4, 10):
        print(N, repr(fine_grid_value(N)))
