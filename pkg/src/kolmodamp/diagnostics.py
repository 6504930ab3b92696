"""Long-time averages, derived turbulence numbers, constants and verdicts.

Every function here is a pure function of its inputs, so re-running the
diagnostics on a saved ledger reproduces the stored report bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynamics import EnergyLedgerRow, ModelParams
from .errors import DegenerateRun, InsufficientHorizon, InsufficientSweep
from .forcing import ForceNumbers
from .spectral_core import NormSet

BOUND_TOL = 1.05
MACHINE_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class AveragingPolicy:
    """burn_in and window are times; stride thins the rows before averaging."""

    burn_in: float
    window: float
    stride: int = 1

    def __post_init__(self):
        if not self.burn_in >= 0 or not self.window > 0 or self.stride < 1:
            raise ValueError("need burn_in >= 0, window > 0, stride >= 1")

    @classmethod
    def for_params(cls, params: ModelParams, window: float | None = None, stride: int = 1) -> AveragingPolicy:
        """burn_in = 5/beta (transient below 1% of the plateau); window defaults to 1/beta."""
        beta = params.beta
        if not beta > 0:
            raise ValueError("the default policy needs beta > 0")
        return cls(5.0 / beta, window if window is not None else 1.0 / beta, stride)

    def satisfies_beta(self, params: ModelParams) -> bool:
        return params.beta > 0 and self.burn_in >= 5.0 / params.beta * (1 - 1e-12)

    def required_horizon(self) -> float:
        return self.burn_in + 3 * self.window


@dataclass(frozen=True)
class Verdict:
    passed: bool
    lhs: float
    rhs: float
    tol: float
    relation: str = "<="

    @property
    def slack(self) -> float:
        """rhs*tol - lhs for '<=' relations (positive means room to spare)."""
        if self.relation == "<=":
            return self.rhs * self.tol - self.lhs
        return self.lhs - self.rhs * self.tol


def _le(lhs: float, rhs: float, tol: float = BOUND_TOL) -> Verdict:
    return Verdict(bool(lhs <= tol * rhs), float(lhs), float(rhs), tol, "<=")


def _ge(lhs: float, rhs: float, tol: float = 1.0) -> Verdict:
    return Verdict(bool(lhs >= tol * rhs), float(lhs), float(rhs), tol, ">=")


@dataclass(frozen=True)
class Averages:
    epsilon: float
    U: float
    drift: float
    n_windows: int
    window_U2: tuple[float, ...] = ()
    window_eps: tuple[float, ...] = ()


def accumulate(rows: Iterable[EnergyLedgerRow], policy: AveragingPolicy, ell0: float) -> Averages:
    """epsilon = nu <||u||_H1^2> / ell0^3 and U = (<||u||^2> / ell0^3)^(1/2).

    The limsup is replaced by the largest mean over consecutive trailing
    windows after burn-in.  ``drift`` is the relative change of U^2 between
    the last two windows.
    """
    rows = list(rows)[:: policy.stride]
    if not rows:
        raise InsufficientHorizon("no ledger rows")
    t = np.array([r.t for r in rows])
    t_end = float(t[-1])
    span = t_end - policy.burn_in
    n_win = int(math.floor(span / policy.window + 1e-9)) if span > 0 else 0
    if n_win < 3:
        raise InsufficientHorizon(
            f"run reaches t={t_end:g}; need burn_in + 3*window = {policy.required_horizon():g}"
        )
    kin = np.array([r.kinetic for r in rows])
    diss = np.array([r.dissipation for r in rows])
    u2s, epss = [], []
    for j in range(n_win):
        hi = t_end - j * policy.window
        lo = hi - policy.window
        sel = (t > lo + 1e-12 * policy.window) & (t <= hi + 1e-12 * policy.window)
        if not sel.any():
            raise InsufficientHorizon("a trailing window holds no rows; reduce stride")
        u2s.append(float(np.mean(kin[sel])) / ell0**3)
        # the dissipation column is 2 nu ||u||_H1^2
        epss.append(0.5 * float(np.mean(diss[sel])) / ell0**3)
    U2 = max(u2s)
    eps = max(epss)
    drift = abs(u2s[0] - u2s[1]) / u2s[0] if u2s[0] > 0 else 0.0
    return Averages(eps, math.sqrt(U2), drift, n_win, tuple(u2s), tuple(epss))


def taylor_scale(nu: float, U: float, epsilon: float) -> float:
    """ell_T = (nu U^2 / epsilon)^(1/2)."""
    return math.sqrt(nu * U**2 / epsilon)


@dataclass(frozen=True)
class EnvelopeResult:
    c: float
    passed: bool
    c_max: float
    beta: float


def envelope_check(
    rows: Sequence[EnergyLedgerRow], params: ModelParams, f_norms: NormSet, kinetic0: float, c_max: float = 10.0
) -> EnvelopeResult:
    """Smallest c with ||u(t)||^2 <= e^{-beta t} ||u0||^2 + c ||f||_{H-1}^2 / (nu beta) (1 - e^{-beta t}).

    Rows with t = 0 carry no information and are skipped.  If the force
    vanishes the bound only holds for c = 0 (pass) or not at all (c = inf).
    """
    beta = params.beta
    if not beta > 0:
        raise ValueError("envelope_check needs beta > 0; use linear_growth_check for alpha = 0")
    t = np.array([r.t for r in rows], dtype=float)
    k = np.array([r.kinetic for r in rows], dtype=float)
    keep = t > 0
    t, k = t[keep], k[keep]
    if t.size == 0:
        return EnvelopeResult(0.0, True, c_max, beta)
    decay = np.exp(-beta * t)
    excess = k - decay * kinetic0
    scale = f_norms.hm1**2 / (params.nu * beta) * (-np.expm1(-beta * t))
    if f_norms.hm1 == 0:
        c = 0.0 if np.all(excess <= 1e-12 * max(kinetic0, MACHINE_FLOOR)) else math.inf
    else:
        c = max(0.0, float(np.max(excess / scale)))
    return EnvelopeResult(c, bool(c <= c_max), c_max, beta)


@dataclass(frozen=True)
class LinearGrowthResult:
    slope: float
    bound: float
    max_ratio: float
    passed: bool


def linear_growth_check(
    rows: Sequence[EnergyLedgerRow], nu: float, f_norms: NormSet, kinetic0: float
) -> LinearGrowthResult:
    """Linear-growth control ||u(t)||^2 <= ||u0||^2 + t ||f||_{H-1}^2 / nu.

    ``slope`` is the least-squares slope of ||u(t)||^2 - ||u0||^2 against t;
    ``max_ratio`` is the largest pointwise ratio of that excess to the bound.
    """
    t = np.array([r.t for r in rows], dtype=float)
    k = np.array([r.kinetic for r in rows], dtype=float)
    bound = f_norms.hm1**2 / nu
    if t.size < 2:
        return LinearGrowthResult(0.0, bound, 0.0, True)
    excess = k - kinetic0
    slope = float(np.polyfit(t, excess, 1)[0])
    pos = t > 0
    ratio = float(np.max(excess[pos] / (t[pos] * bound))) if bound > 0 else (0.0 if np.all(excess <= 0) else math.inf)
    return LinearGrowthResult(slope, bound, ratio, bool(slope <= bound and ratio <= 1.0))


@dataclass(frozen=True)
class DiagnosticsReport:
    epsilon: float
    U: float
    Re: float
    lT: float
    kolmogorov_ratio: float
    gr_re_ratio: float
    taylor_ratio: float
    envelope_c: float
    fl_u2_ratio: float = math.nan
    k41_taylor: float = math.nan
    drift: float = math.nan
    verdicts: dict[str, Verdict] = field(default_factory=dict)


def kolmogorov_and_taylor(averages: Averages, force: ForceNumbers, params: ModelParams) -> dict[str, float]:
    """Derived numbers: Re, ell_T, eps L / U^3, Gr / Re^2, F L / U^2, ell_T / ell0, ell_T sqrt(Re) / ell0."""
    eps, U = averages.epsilon, averages.U
    if not (eps > MACHINE_FLOOR and U > MACHINE_FLOOR):
        raise DegenerateRun(f"U = {U:g}, epsilon = {eps:g}")
    nu, ell0 = params.nu, params.ell0
    Re = U * force.L / nu
    lT = taylor_scale(nu, U, eps)
    return {
        "Re": Re,
        "lT": lT,
        "kolmogorov_ratio": eps * force.L / U**3,
        "gr_re_ratio": force.Gr / Re**2,
        "fl_u2_ratio": force.F * force.L / U**2,
        "taylor_ratio": lT / ell0,
        "k41_taylor": lT * math.sqrt(Re) / ell0,
    }


def dissipation_bounds_check(
    epsilon: float, U: float, force: ForceNumbers, params: ModelParams, box_len: float
) -> dict[str, Verdict]:
    """Upper and lower bounds on epsilon and U, each with the 1.05 allowance."""
    nu, ell0, theta = params.nu, params.ell0, params.theta
    hm1_sq = force.norms.hm1**2
    FU = force.F * U
    big = (20 * theta) ** 2
    return {
        "eps_le_hm1": _le(epsilon, hm1_sq / (nu * ell0**3)),
        # Poincare constant of the periodic box with c = 1 (||grad u||_L2 = ||u||_H1 exactly)
        "poincare_U": _le(nu * (4 * math.pi**2 / box_len**2) * U**2, hm1_sq / (nu * ell0**3)),
        "eps_le_FU": _le(epsilon, FU),
        "FU_le_eps": _le(FU, big * epsilon),
        "averaged_ineq": _le(nu / ell0**2 * U**2, FU + big * epsilon),
    }


def build_report(
    averages: Averages,
    force: ForceNumbers,
    params: ModelParams,
    box_len: float,
    envelope: EnvelopeResult | None = None,
    linear_growth: LinearGrowthResult | None = None,
) -> DiagnosticsReport:
    ratios = kolmogorov_and_taylor(averages, force, params)
    verdicts = dissipation_bounds_check(averages.epsilon, averages.U, force, params, box_len)
    env_c = math.nan
    if envelope is not None:
        env_c = envelope.c
        verdicts["envelope"] = _le(envelope.c, envelope.c_max, 1.0)
    if linear_growth is not None:
        verdicts["linear_growth"] = Verdict(linear_growth.passed, linear_growth.slope, linear_growth.bound, 1.0)
    return DiagnosticsReport(
        epsilon=averages.epsilon,
        U=averages.U,
        Re=ratios["Re"],
        lT=ratios["lT"],
        kolmogorov_ratio=ratios["kolmogorov_ratio"],
        gr_re_ratio=ratios["gr_re_ratio"],
        taylor_ratio=ratios["taylor_ratio"],
        envelope_c=env_c,
        fl_u2_ratio=ratios["fl_u2_ratio"],
        k41_taylor=ratios["k41_taylor"],
        drift=averages.drift,
        verdicts=verdicts,
    )


@dataclass(frozen=True)
class TheoreticalConstants:
    a1: float
    a2: float
    b1: float
    b2: float
    g0_condition: bool
    compat: bool


def theoretical_constants(c0: float, c1: float, c3: float, theta: float, G0: float) -> TheoreticalConstants:
    """Closed-form constants of the two-sided dissipation bounds.

    a1 = c0 / (400^2 theta^4 G0)
    a2 = ((1 / (2 c1)) (-c3 sqrt(c0) / sqrt(G0) + sqrt(c3^2 c0 / G0 + 4 c1)))^(-2)
    b1 = a1 / (20 theta)^2,  b2 = a2
    g0_condition: 4 a2 G0 / c0 <= 1;  compat: G0 > c0 (1 + sqrt(c3))^2 / c1
    """
    a1 = c0 / (400.0**2 * theta**4 * G0)
    root = (-c3 * math.sqrt(c0) / math.sqrt(G0) + math.sqrt(c3**2 * c0 / G0 + 4 * c1)) / (2 * c1)
    a2 = root**-2
    b1 = a1 / (20 * theta) ** 2
    return TheoreticalConstants(
        a1=a1,
        a2=a2,
        b1=b1,
        b2=a2,
        g0_condition=bool(4 * a2 * G0 / c0 <= 1),
        compat=bool(G0 > c0 * (1 + math.sqrt(c3)) ** 2 / c1),
    )


def constants_for(force: ForceNumbers) -> TheoreticalConstants:
    return theoretical_constants(force.c0, force.c1, force.c3, force.theta, force.G0)


@dataclass(frozen=True)
class SweepPoint:
    ell: float
    Gr: float
    Re: float
    U: float
    epsilon: float
    F: float
    L: float
    lT: float
    ell0: float

    @classmethod
    def from_report(cls, report: DiagnosticsReport, force: ForceNumbers) -> SweepPoint:
        return cls(force.ell, force.Gr, report.Re, report.U, report.epsilon, force.F, force.L, report.lT, force.ell0)


@dataclass(frozen=True)
class SweepResult:
    slopes: dict[str, float]
    bands: dict[str, float]
    gr_span: float
    shrink: float
    verdicts: dict[str, Verdict]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())


SLOPE_TARGETS = {"Gr": 6.0, "U": 1.5, "epsilon": 3.0}


def band_width(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min())


def sweep_analysis(
    points: Sequence[SweepPoint],
    band_max: float = 5.0,
    taylor_band_max: float = 3.0,
    slope_tol: float = 0.2,
    min_shrink: float = 10.0,
    min_gr_span: float = 100.0,
) -> SweepResult:
    """Log-log slopes against ell and band-widths of the bounded ratios."""
    if len(points) < 4:
        raise InsufficientSweep(f"need at least 4 sweep points, got {len(points)}")
    pts = sorted(points, key=lambda p: p.ell)
    ell = np.array([p.ell for p in pts])
    Gr = np.array([p.Gr for p in pts])
    gr_span = float(Gr.max() / Gr.min())
    if gr_span < min_gr_span:
        raise InsufficientSweep(f"Gr spans only {gr_span:.3g}x (need {min_gr_span:g}x)")
    logl = np.log(ell)
    slopes = {
        "Gr": float(np.polyfit(logl, np.log(Gr), 1)[0]),
        "U": float(np.polyfit(logl, np.log([p.U for p in pts]), 1)[0]),
        "epsilon": float(np.polyfit(logl, np.log([p.epsilon for p in pts]), 1)[0]),
    }
    bands = {
        "gr_re": band_width([p.Gr / p.Re**2 for p in pts]),
        "fl_u2": band_width([p.F * p.L / p.U**2 for p in pts]),
        "kolmogorov": band_width([p.epsilon * p.L / p.U**3 for p in pts]),
        "taylor": band_width([p.lT / p.ell0 for p in pts]),
    }
    k41 = np.array([p.ell0 / math.sqrt(p.Re) for p in pts])
    shrink = float(k41.max() / k41.min())
    verdicts: dict[str, Verdict] = {
        "band_gr_re": _le(bands["gr_re"], band_max, 1.0),
        "band_fl_u2": _le(bands["fl_u2"], band_max, 1.0),
        "band_kolmogorov": _le(bands["kolmogorov"], band_max, 1.0),
        "band_taylor": _le(bands["taylor"], taylor_band_max, 1.0),
        "k41_shrink": _ge(shrink, min_shrink),
        "gr_span": _ge(gr_span, min_gr_span),
    }
    for name, target in SLOPE_TARGETS.items():
        err = abs(slopes[name] - target)
        verdicts[f"slope_{name}"] = _le(err, slope_tol * target, 1.0)
    return SweepResult(slopes, bands, gr_span, shrink, verdicts)
