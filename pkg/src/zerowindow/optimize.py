"""Maximizing C(h) over h_n(x) = (1 - x^2)(1 + a2 x^2 + ... + a2n x^2n)."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .testfunc import TestFunctionH, c_of_h, h_integrals, is_monotone_decreasing

# coefficients from the published n = 2 optimum
PUBLISHED_H2 = (1.0, -0.233428, 0.0189588)


@dataclass
class OptimizeOptions:
    starts: int = 25
    tolerance: float = 1e-9
    max_iter: int = 400
    step: float = 0.1
    workers: int = 1


@dataclass
class OptimumReport:
    n: int
    coefficients: list[float]
    c_value: float
    objective_value: float
    iterations: int
    converged: bool
    monotone: bool = True
    warnings: list[str] = field(default_factory=list)

    def profile(self) -> TestFunctionH:
        return h_family(self.coefficients)

    def to_json_dict(self) -> dict:
        return asdict(self)


def h_family(coefficients) -> TestFunctionH:
    """h_n with the a0 = 1 gauge and the given (a2, ..., a2n)."""
    return TestFunctionH.polynomial([1, *coefficients])


def objective(n: int, coefficients) -> Fraction:
    """-int h^2 / int h h'' for h_n, evaluated exactly."""
    coefficients = list(coefficients)
    if len(coefficients) != n:
        raise ValueError(f"expected {n} coefficients, got {len(coefficients)}")
    _, i2, i3 = h_integrals(h_family([Fraction(c) for c in coefficients]))
    if i3 == 0:
        raise ZeroDivisionError("degenerate candidate: int h h'' = 0")
    return -i2 / i3


def objective_n2_closed_form(a2, a4):
    """Hard-coded rational function for n = 2; an oracle for :func:`objective`."""
    num = 6006 + 286 * a2**2 + 572 * a4 + 70 * a4**2 + 52 * a2 * (33 + 5 * a4)
    den = 39 * (385 + 121 * a2**2 + 66 * a4 + 65 * a4**2 + 154 * a2 * (1 + a4))
    return num / den


@lru_cache(maxsize=16)
def gram_matrices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact bilinear forms: int h^2 = c.G2.c and int h h'' = c.G3.c.

    Here c = (a0, a2, ..., a2n) are the q-coefficients of h_n.
    """
    basis = [TestFunctionH.polynomial([0] * k + [1]) for k in range(n + 1)]
    g2 = np.empty((n + 1, n + 1))
    g3 = np.empty((n + 1, n + 1))
    for j, k in itertools.product(range(n + 1), repeat=2):
        bj, bk = basis[j].coeffs, basis[k].coeffs
        d2 = basis[k].derivative_coeffs(2)
        g2[j, k] = float(_bilinear(bj, bk))
        g3[j, k] = float(_bilinear(bj, d2))
    return g2, 0.5 * (g3 + g3.T)


def _bilinear(p, q) -> Fraction:
    return sum((a * b / (i + j + 1) for i, a in enumerate(p) for j, b in enumerate(q)), Fraction(0))


def _float_objective(n: int):
    g2, g3 = gram_matrices(n)

    def f(x):
        c = np.concatenate(([1.0], x))
        return -(c @ g2 @ c) / (c @ g3 @ c)

    return f


def nelder_mead(func, x0, step=0.1, tol=1e-9, max_iter=400,
                alpha=1.0, gamma=2.0, rho=0.5, shrink=0.5):
    """Minimize ``func`` by the downhill simplex method.

    Stops when the simplex diameter drops below ``tol`` or after
    ``max_iter`` iterations.  Returns (best point, value, iterations, converged).
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    simplex = [x0]
    for i in range(dim):
        x = x0.copy()
        x[i] += step
        simplex.append(x)
    values = [func(x) for x in simplex]
    it = 0
    converged = False
    while it < max_iter:
        order = sorted(range(dim + 1), key=lambda i: (values[i], tuple(simplex[i])))
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        diam = max(np.max(np.abs(s - simplex[0])) for s in simplex[1:])
        if diam < tol:
            converged = True
            break
        it += 1
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = func(xr)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = func(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + rho * (xr - centroid)
        else:
            xc = centroid + rho * (worst - centroid)
        fc = func(xc)
        if fc < min(fr, values[-1]):
            simplex[-1], values[-1] = xc, fc
            continue
        best = simplex[0]
        simplex = [best] + [best + shrink * (s - best) for s in simplex[1:]]
        values = [values[0]] + [func(s) for s in simplex[1:]]
    return simplex[0], values[0], it, converged


def start_lattice(n: int, starts: int = 25) -> list[np.ndarray]:
    """Deterministic starting points on a regular lattice in [-1, 1]^n."""
    if n == 0:
        return [np.zeros(0)]
    per_axis = max(2, int(round(starts ** (1.0 / n))))
    axis = np.linspace(-1.0, 1.0, per_axis)
    return [np.array(p) for p in itertools.product(axis, repeat=n)]


def _run_start(payload):
    n, x0, opts = payload
    func = _float_objective(n)
    x, val, it, ok = nelder_mead(lambda v: -func(v), x0, opts.step, opts.tolerance, opts.max_iter)
    return x, -val, it, ok


def maximize_c(n: int, options: OptimizeOptions | None = None) -> OptimumReport:
    """Multi-start simplex search for the best h_n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    opts = options or OptimizeOptions()
    if n == 0:
        value = objective(0, [])
        return OptimumReport(0, [], math.sqrt(value), float(value), 0, True,
                             is_monotone_decreasing(h_family([])))
    payloads = [(n, x0, opts) for x0 in start_lattice(n, opts.starts)]
    if opts.workers > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as pool:
            results = list(pool.map(_run_start, payloads))
    else:
        results = [_run_start(p) for p in payloads]
    # thread-count independent choice: best objective, then lexicographic coefficients
    x, _, it, ok = min(results, key=lambda r: (-r[1], tuple(r[0])))
    coeffs = [float(c) for c in x]
    exact = objective(n, coeffs)
    monotone = is_monotone_decreasing(h_family(coeffs))
    notes = []
    if not ok:
        notes.append(f"simplex did not reach diameter {opts.tolerance} in {opts.max_iter} iterations")
    if not monotone:
        notes.append("optimal profile is not monotonically decreasing on [0, 1]")
    return OptimumReport(n, coeffs, math.sqrt(exact), float(exact), it, ok, monotone, notes)


def scan_candidates(optimum: OptimumReport | None = None) -> list[tuple[str, TestFunctionH, float]]:
    """C(h) for the standard candidate profiles, largest first."""
    if optimum is None:
        optimum = maximize_c(2)
    catalog = [
        ("(1-x^2)", TestFunctionH.polynomial([1])),
        ("(1-x^2)^2", TestFunctionH.polynomial([1, -1])),
        ("exp(-1/(1-x^2))", TestFunctionH.bump(1)),
        ("exp(-0.754212/(1-x^2))", TestFunctionH.bump(Fraction("0.754212"))),
        ("optimal h_2", optimum.profile()),
    ]
    rows = [(name, h, c_of_h(h)) for name, h in catalog]
    return sorted(rows, key=lambda r: -r[2])
