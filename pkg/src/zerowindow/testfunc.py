"""Test functions for the window bounds.

A profile ``h`` on [-1, 1] generates the lower-bound test function:
``f(y) = h(2y/sigma)``, ``g = f * f`` and ``phi`` the Fourier transform of
``g + (2 pi tau)^-2 g''``, so that ``phi(x) = fhat(x)^2 (1 - (x/tau)^2)``.
The Fejer function drives the upper bound.

Fourier transforms use the kernel ``exp(-2 pi i x y)`` throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .quadrature import QuadratureError, composite_nodes, integrate

BUMP_TOL = 1e-12


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        return Fraction(c)
    return Fraction(str(c)) if isinstance(c, str) else Fraction(c)


def _polyval(coeffs, x):
    acc = np.zeros_like(np.asarray(x, dtype=float))
    for c in reversed(coeffs):
        acc = acc * x + float(c)
    return acc


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1) if p and q else []
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_deriv(p):
    return [k * p[k] for k in range(1, len(p))]


def _integrate_unit(p) -> Fraction:
    """Exact integral over [0, 1] of a polynomial with rational coefficients."""
    return sum((c / (k + 1) for k, c in enumerate(p)), Fraction(0))


@dataclass(frozen=True)
class TestFunctionH:
    """Profile h on [-1, 1], zero outside.

    ``even_polynomial`` profiles are stored through ``q``: h(x) = (1 - x^2) q(x^2),
    so h is even and vanishes at +-1 by construction.  ``bump`` profiles are
    exp(-a / (1 - x^2)).
    """

    __test__ = False

    kind: str
    q_coeffs: tuple[Fraction, ...] = ()
    bump_parameter: Fraction | None = None
    coeffs: tuple[Fraction, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind == "even_polynomial":
            q = tuple(_frac(c) for c in self.q_coeffs)
            object.__setattr__(self, "q_coeffs", q)
            full = [Fraction(0)] * (2 * len(q) + 1) if q else []
            for k, c in enumerate(q):
                full[2 * k] += c
                full[2 * k + 2] -= c
            object.__setattr__(self, "coeffs", tuple(full))
        elif self.kind == "bump":
            if self.bump_parameter is None or _frac(self.bump_parameter) <= 0:
                raise ValueError("bump parameter must be positive")
            object.__setattr__(self, "bump_parameter", _frac(self.bump_parameter))
            object.__setattr__(self, "coeffs", ())
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def polynomial(cls, q_coeffs) -> "TestFunctionH":
        """h(x) = (1 - x^2)(q0 + q1 x^2 + q2 x^4 + ...)."""
        return cls("even_polynomial", tuple(q_coeffs))

    @classmethod
    def bump(cls, a) -> "TestFunctionH":
        return cls("bump", bump_parameter=a)

    @property
    def is_polynomial(self) -> bool:
        return self.kind == "even_polynomial"

    def derivative_coeffs(self, order: int) -> list[Fraction]:
        p = list(self.coeffs)
        for _ in range(order):
            p = _poly_deriv(p)
        return p

    def _bump_parts(self, x):
        a = float(self.bump_parameter)
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1.0
        u = np.where(inside, 1.0 - x * x, 1.0)
        h = np.where(inside, np.exp(-a / u), 0.0)
        return x, u, h, a, inside

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order: int = 0):
        """h^(order)(x) for order in {0, 1, 2}, zero for |x| >= 1."""
        x = np.asarray(x, dtype=float)
        if self.is_polynomial:
            vals = _polyval(self.derivative_coeffs(order), x)
            return np.where(np.abs(x) <= 1.0, vals, 0.0)
        x, u, h, a, inside = self._bump_parts(x)
        if order == 0:
            return h
        if order == 1:
            return np.where(inside, h * (-2.0 * a * x / u**2), 0.0)
        if order == 2:
            bracket = 4.0 * a * a * x * x / u**4 - 2.0 * a / u**2 - 8.0 * a * x * x / u**3
            return np.where(inside, h * bracket, 0.0)
        raise ValueError("only derivatives up to order 2 are available")

    def to_json_dict(self) -> dict:
        if self.is_polynomial:
            return {"kind": self.kind, "coefficients": [str(c) for c in self.q_coeffs]}
        return {"kind": self.kind, "parameter": str(self.bump_parameter)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "TestFunctionH":
        if d["kind"] == "even_polynomial":
            return cls.polynomial([Fraction(c) for c in d["coefficients"]])
        return cls.bump(Fraction(d["parameter"]))


def h_integrals(h: TestFunctionH):
    """(int_0^1 h, int_0^1 h^2, int_0^1 h h'') -- exact for polynomial h."""
    if h.is_polynomial:
        p = list(h.coeffs)
        if not p:
            return Fraction(0), Fraction(0), Fraction(0)
        i1 = _integrate_unit(p)
        i2 = _integrate_unit(_poly_mul(p, p))
        i3 = _integrate_unit(_poly_mul(p, h.derivative_coeffs(2)))
        return i1, i2, i3
    try:
        i1 = integrate(h, 0.0, 1.0, tol=BUMP_TOL)
        i2 = integrate(lambda x: h(x) ** 2, 0.0, 1.0, tol=BUMP_TOL)
        i3 = integrate(lambda x: h(x) * h.derivative(x, 2), 0.0, 1.0, tol=BUMP_TOL)
    except QuadratureError as exc:
        raise QuadratureError(f"bump integrals did not converge: {exc}") from exc
    return i1, i2, i3


def c_of_h(h: TestFunctionH) -> float:
    """C(h) = sqrt(-int h^2 / int h h'')."""
    _, i2, i3 = h_integrals(h)
    if i3 >= 0:
        raise ValueError("degenerate profile: int_0^1 h h'' must be negative")
    return math.sqrt(float(-i2 / i3) if isinstance(i2, Fraction) else -i2 / i3)


def ratio_phihat0_phi0(h: TestFunctionH, sigma: float, tau: float | None):
    """phihat(0)/phi(0) from the integrals of h; ``tau=None`` is the tau -> oo limit.

    Exact (a Fraction) when h is a polynomial and sigma, tau are rational
    and the pi factor is absent; otherwise a float.
    """
    if sigma <= 0 or (tau is not None and tau <= 0):
        raise ValueError("sigma and tau must be positive")
    i1, i2, i3 = h_integrals(h)
    if i1 == 0:
        raise ValueError("int_0^1 h vanishes; the ratio is undefined")
    if tau is None:
        num = i2
        if isinstance(i2, Fraction) and isinstance(sigma, (int, Fraction)):
            return num / (Fraction(sigma) * i1 * i1)
        return float(num) / (sigma * float(i1) ** 2)
    num = float(i2) + float(i3) / (sigma * tau * math.pi) ** 2
    return num / (sigma * float(i1) ** 2)


def is_monotone_decreasing(h: TestFunctionH, points: int = 2001) -> bool:
    x = np.linspace(0.0, 1.0, points)
    return bool(np.all(np.diff(h(x)) <= 1e-14))


@dataclass(frozen=True)
class TestFunctionPhi:
    """The lower-bound test function built from a profile.

    ``phi_at`` evaluates fhat(x)^2 (1 - (x/tau)^2) with fhat by quadrature;
    ``phihat_at`` evaluates g(y) + (2 pi tau)^-2 g''(y) by convolution
    quadrature and is identically zero for |y| >= sigma.
    """

    __test__ = False

    source_h: TestFunctionH
    sigma: float
    tau: float

    def f(self, y):
        return self.source_h(2.0 * np.asarray(y, dtype=float) / self.sigma)

    def f_prime(self, y):
        return (2.0 / self.sigma) * self.source_h.derivative(2.0 * np.asarray(y, dtype=float) / self.sigma, 1)

    def fhat(self, x):
        # fhat(x) = sigma * int_0^1 h(u) cos(pi sigma x u) du, f even
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        freq = math.pi * self.sigma * np.abs(x)
        bands = np.maximum(8, np.ceil(freq / math.pi) + 8).astype(int)
        for panels in np.unique(bands):
            sel = bands == panels
            u, w = composite_nodes(0.0, 1.0, int(panels), 20)
            hu = self.source_h(u) * w
            out[sel] = self.sigma * np.cos(np.outer(freq[sel], u)) @ hu
        return out

    def phi_at(self, x):
        x = np.asarray(x, dtype=float)
        vals = self.fhat(x) ** 2 * (1.0 - (x.ravel() / self.tau) ** 2)
        return vals.reshape(x.shape) if x.ndim else float(vals[0])

    def _conv(self, y: float, second: bool) -> float:
        s = self.sigma / 2.0
        y = abs(y)
        lo, hi = y - s, s
        if lo >= hi:
            return 0.0
        if second:
            # g'' = f' * f'; equals f * f'' as distributions, with no boundary terms
            return integrate(lambda t: self.f_prime(t) * self.f_prime(y - t), lo, hi, tol=1e-14)
        return integrate(lambda t: self.f(t) * self.f(y - t), lo, hi, tol=1e-14)

    def g(self, y) -> float:
        return self._conv(float(y), second=False)

    def g_second(self, y) -> float:
        return self._conv(float(y), second=True)

    def phihat_at(self, y):
        def one(v):
            if abs(v) >= self.sigma:
                return 0.0
            return self.g(v) + self.g_second(v) / (2.0 * math.pi * self.tau) ** 2

        if np.ndim(y) == 0:
            return one(float(y))
        return np.array([one(float(v)) for v in np.ravel(y)]).reshape(np.shape(y))

    def to_json_dict(self) -> dict:
        return {**self.source_h.to_json_dict(), "sigma": self.sigma, "tau": self.tau}


def build_phi(h: TestFunctionH, sigma: float, tau: float) -> TestFunctionPhi:
    if sigma <= 0 or tau <= 0:
        raise ValueError("sigma and tau must be positive")
    if not is_monotone_decreasing(h):
        warnings.warn("profile is not monotonically decreasing on [0, 1]", stacklevel=2)
    return TestFunctionPhi(h, float(sigma), float(tau))


@dataclass(frozen=True)
class FejerPsi:
    """psi(x) = (sin(pi sigma x) / (pi sigma x))^2 with triangular transform."""

    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def psi_at(self, x):
        return np.sinc(self.sigma * np.asarray(x, dtype=float)) ** 2

    def psihat_at(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) < self.sigma, (1.0 - np.abs(y) / self.sigma) / self.sigma, 0.0)

    def psiprime_at(self, x):
        x = np.asarray(x, dtype=float)
        w = self.sigma * math.pi * x
        safe = np.where(x == 0, 1.0, x)
        ws = np.where(x == 0, 1.0, w)
        val = 2.0 * np.sin(ws) / (self.sigma * math.pi * safe**2) * (np.cos(ws) - np.sin(ws) / ws)
        return np.where(x == 0, 0.0, val)

    # lets the Fejer function stand in wherever a test function is expected
    phi_at = psi_at
    phihat_at = psihat_at

    def to_json_dict(self) -> dict:
        return {"kind": "fejer", "sigma": self.sigma}


def fejer(sigma: float) -> FejerPsi:
    return FejerPsi(float(sigma))


def fourier_transform_numeric(fn, ys, x_max: float, panels_per_unit: int = 8) -> np.ndarray:
    """2 int_0^x_max fn(x) cos(2 pi x y) dx for an even ``fn`` at each y.

    Fixed composite Gauss-Legendre on [0, x_max] with ``fn`` evaluated once.
    Truncation error follows the tail of ``fn``; choosing ``x_max`` so the
    tail's boundary terms vanish (a multiple of 1/sigma for a profile-built
    phi, with y a half-integer multiple of sigma) makes it small.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    top = float(np.max(np.abs(ys))) + 1.0
    panels = max(1, int(math.ceil(panels_per_unit * x_max * top)))
    x, w = composite_nodes(0.0, x_max, panels, 20)
    fw = np.asarray(fn(x), dtype=float) * w
    return 2.0 * np.array([float(np.dot(fw, np.cos(2 * math.pi * x * y))) for y in ys])
