"""Brute-force oracle for the frozen expected values used in the C++ tests.

Each value is the argmin of a one-dimensional (N = 2) strictly convex
objective over the clipped simplex {x : x_i >= 1/(N T), sum x = 1}. The
search is an exhaustive grid at step 1e-6 followed by a golden-section
refinement in extended precision. Nothing here shares code with the
Newton solver it checks.
"""
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def argmin_1d(f, lo, hi):
    grid = np.linspace(lo, hi, int((hi - lo) / 1e-6) + 1)
    vals = np.array([float(f(mp.mpf(g))) for g in grid]) if len(grid) < 2000 else None
    if vals is None:
        vals = f_np(f, grid)
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]
    a, b = mp.mpf(a), mp.mpf(b)
    gr = (mp.sqrt(5) - 1) / 2
    for _ in range(200):
        c = b - gr * (b - a)
        d = a + gr * (b - a)
        if f(c) < f(d):
            b = d
        else:
            a = c
    return (a + b) / 2


def f_np(f, grid):
    return np.array([float(f(mp.mpf(float(g)))) for g in grid])


def omd_step_example():
    n, t_h = 2, 16
    lb = mp.mpf(1) / (n * t_h)
    xt = [mp.mpf("0.5"), mp.mpf("0.5")]
    r = [mp.mpf(1), mp.mpf("0.5")]
    dot = xt[0] * r[0] + xt[1] * r[1]
    grad = [-r[0] / dot, -r[1] / dot]
    beta = mp.mpf("0.5")
    eta = 1 / (2048 * n * mp.log(t_h) ** 2)
    A = [[2 + grad[0] ** 2, grad[0] * grad[1]], [grad[0] * grad[1], 2 + grad[1] ** 2]]

    def obj(x1):
        x = [x1, 1 - x1]
        d = [x[0] - xt[0], x[1] - xt[1]]
        quad = sum(d[i] * A[i][j] * d[j] for i in range(2) for j in range(2))
        lin = sum(x[i] * grad[i] for i in range(2))
        bar = sum((x[i] / xt[i] - 1 - mp.log(x[i] / xt[i])) / eta for i in range(2))
        return lin + beta / 2 * quad + bar

    x1 = argmin_1d(obj, float(lb), float(1 - lb))
    return x1, eta


def ons_step_example():
    n, t_h = 2, 16
    xt = [mp.mpf("0.5"), mp.mpf("0.5")]
    r = [mp.mpf(1), mp.mpf("0.5")]
    dot = xt[0] * r[0] + xt[1] * r[1]
    grad = [-r[0] / dot, -r[1] / dot]
    beta = mp.mpf("0.5")
    A = [[2 + grad[0] ** 2, grad[0] * grad[1]], [grad[0] * grad[1], 2 + grad[1] ** 2]]
    lb = mp.mpf(1) / (n * t_h)

    def obj(x1):
        x = [x1, 1 - x1]
        d = [x[0] - xt[0], x[1] - xt[1]]
        quad = sum(d[i] * A[i][j] * d[j] for i in range(2) for j in range(2))
        return sum(x[i] * grad[i] for i in range(2)) + beta / 2 * quad

    return argmin_1d(obj, float(lb), float(1 - lb))


def leader_example():
    n, t_h = 2, 16
    gamma = mp.mpf(1) / 25
    lb = mp.mpf(1) / (n * t_h)

    def obj(u1):
        u = [u1, 1 - u1]
        return -mp.log(u[0] + u[1] / 2) - (mp.log(u[0]) + mp.log(u[1])) / gamma

    return argmin_1d(obj, float(lb), float(1 - lb))


if __name__ == "__main__":
    x1, eta = omd_step_example()
    print("omd step x_{t+1} =", mp.nstr(x1, 17), mp.nstr(1 - x1, 17), "eta =", mp.nstr(eta, 17))
    # Learning rate for the coordinate that fell below 1/N after the step.
    x2 = 1 - x1
    lr2 = eta * mp.e ** (mp.log(1 / (2 * x2)) / mp.log(16))
    print("eta_2 for shrinking coordinate =", mp.nstr(lr2, 17), "ratio", mp.nstr(lr2 / eta, 17))
    o1 = ons_step_example()
    print("ons step x_2 =", mp.nstr(o1, 17), mp.nstr(1 - o1, 17))
    u1 = leader_example()
    print("leader u =", mp.nstr(u1, 17), mp.nstr(1 - u1, 17))
