"""Bounds on the average number of normalized zeros in [-tau, tau].

All values are R -> infinity limits; the finite-R error term is reported
by the density engine and never folded in here.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .testfunc import FejerPsi, TestFunctionH, c_of_h, fejer, ratio_phihat0_phi0


@dataclass
class BoundsReport:
    r: int
    sigma: float
    tau: float
    model_a: float
    model_b: float
    lower: float
    upper: float
    rmt: float
    tau_bsd: float
    sandwich_ok: bool
    tau_lower: float | None = None

    def to_json_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        rows = [
            ("window half-width tau", self.tau),
            ("certified window tau_BSD", self.tau_bsd),
            ("lower bound", self.lower),
            ("random matrix prediction", self.rmt),
            ("upper bound", self.upper),
        ]
        width = max(len(k) for k, _ in rows)
        lines = [f"r = {self.r}, sigma = {self.sigma:.12g}, a = {self.model_a:.12g}, b = {self.model_b:.12g}"]
        lines += [f"  {k:<{width}}  {v:.12g}" for k, v in rows]
        lines.append(f"  {'lower <= rmt <= upper':<{width}}  {'yes' if self.sandwich_ok else 'NO'}")
        return "\n".join(lines)


def lower_bound(model_a: float, model_b: float, h: TestFunctionH, sigma: float, tau: float) -> float:
    """a + b * phihat(0)/phi(0) for the profile-built phi."""
    return model_a + model_b * float(ratio_phihat0_phi0(h, sigma, tau))


def tau_bsd(h: TestFunctionH, sigma: float) -> float:
    """1 / (pi C(h) sigma): the window where phihat(0) vanishes."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 1.0 / (math.pi * c_of_h(h) * sigma)


def upper_bound(model_a: float, model_b: float, psi: FejerPsi, tau: float) -> float:
    """a + (a (psi(0) - psi(tau)) + b psihat(0)) / psi(tau), for 0 < tau < 1/sigma."""
    if not 0 < tau < 1.0 / psi.sigma:
        raise ValueError(f"tau must lie in (0, 1/sigma) = (0, {1.0 / psi.sigma}); psi vanishes at 1/sigma")
    p0 = float(psi.psi_at(0.0))
    pt = float(psi.psi_at(tau))
    return model_a + (model_a * (p0 - pt) + model_b * float(psi.psihat_at(0.0))) / pt


def upper_bound_collapsed(model_a: float, model_b: float, psi: FejerPsi, tau: float) -> float:
    """The same bound written as (a psi(0) + b psihat(0)) / psi(tau)."""
    return (model_a * float(psi.psi_at(0.0)) + model_b * float(psi.psihat_at(0.0))) / float(psi.psi_at(tau))


def rmt_window(r: int, tau: float) -> float:
    """r + 1/2 + 2 tau: the orthogonal-ensemble count in [-tau, tau]."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return r + 0.5 + 2.0 * tau


def sandwich(r: int, sigma: float, h: TestFunctionH, psi: FejerPsi | None = None,
             model_a: float | None = None, model_b: float = 1.0,
             tau: float | None = None, tau_lower: float | None = None) -> BoundsReport:
    """Lower bound at tau_BSD, prediction and upper bound at tau = 1/(2 sigma)."""
    a = r + 0.5 if model_a is None else model_a
    psi = psi or fejer(sigma)
    tb = tau_bsd(h, sigma)
    t_low = tb if tau_lower is None else tau_lower
    t = 0.5 / sigma if tau is None else tau
    lower = lower_bound(a, model_b, h, sigma, t_low)
    rmt = rmt_window(r, t)
    upper = upper_bound(a, model_b, psi, t)
    return BoundsReport(r, sigma, t, a, model_b, lower, upper, rmt, tb,
                        bool(lower <= rmt <= upper), t_low)
