import math

import numpy as np
import pytest

from kolmodamp.diagnostics import (
    AveragingPolicy,
    SweepPoint,
    accumulate,
    linear_growth_check,
    band_width,
    build_report,
    dissipation_bounds_check,
    envelope_check,
    kolmogorov_and_taylor,
    sweep_analysis,
    taylor_scale,
    theoretical_constants,
)
from kolmodamp.dynamics import EnergyLedgerRow, ModelParams
from kolmodamp.errors import DegenerateRun, InsufficientHorizon, InsufficientSweep
from kolmodamp.forcing import ForceNumbers
from kolmodamp.spectral_core import NormSet


def rows_from(t, kinetic, dissipation):
    return [EnergyLedgerRow(float(a), float(b), float(c), 0.0, 0.0, 0.0) for a, b, c in zip(t, kinetic, dissipation)]


def force(F=2.0, L=3.0, Gr=10.0, hm1=1.0, ell=4.0):
    return ForceNumbers(
        c0=1.0, gamma=1.0 / L, L=L, F=F, G0=1.0, Gr=Gr, c1=1.0, c2=0.1, c3=0.1,
        norms=NormSet(F, 1.0, hm1, 1.0), ell=ell,
    )


PARAMS = ModelParams(nu=1.0, ell0=1.0, alpha=1.0, kappa=0.05, dt=1.0, t_end=100.0)


class TestAccumulate:
    """Trailing-window averages on synthetic ledgers with known means."""

    def test_constant_series(self):
        t = np.arange(1, 101, dtype=float)
        av = accumulate(rows_from(t, np.full(100, 8.0), np.full(100, 6.0)), AveragingPolicy(40, 20), 2.0)
        assert av.n_windows == 3
        assert av.U == pytest.approx(math.sqrt(8.0 / 8.0))
        assert av.epsilon == pytest.approx(0.5 * 6.0 / 8.0)
        assert av.drift == 0.0

    def test_takes_largest_window(self):
        t = np.arange(1, 101, dtype=float)
        k = np.where(t <= 80, 4.0, 1.0)
        av = accumulate(rows_from(t, k, k), AveragingPolicy(40, 20), 1.0)
        # windows (80,100], (60,80], (40,60]
        assert av.window_U2 == (1.0, 4.0, 4.0)
        assert av.U == 2.0
        assert av.drift == pytest.approx(3.0)

    def test_insufficient(self):
        t = np.arange(1, 51, dtype=float)
        with pytest.raises(InsufficientHorizon):
            accumulate(rows_from(t, t, t), AveragingPolicy(20, 20), 1.0)
        with pytest.raises(InsufficientHorizon):
            accumulate([], AveragingPolicy(0, 1), 1.0)

    def test_default_policy(self):
        p = ModelParams.damped_default(1.0, 1.0, 1.0, dt=1.0, t_end=10.0)
        pol = AveragingPolicy.for_params(p)
        assert pol.burn_in == pytest.approx(2000.0)
        assert pol.window == pytest.approx(400.0)
        assert pol.satisfies_beta(p)
        assert not AveragingPolicy(100, 10).satisfies_beta(p)


class TestEnvelope:
    def test_exact_envelope_gives_c_one(self):
        p = ModelParams(nu=2.0, ell0=1.0, alpha=0.5, kappa=1.0, dt=0.1, t_end=10.0)
        beta = p.beta  # min(1, 2) = 1
        hm1 = 3.0
        t = np.linspace(0.1, 10, 100)
        k0 = 5.0
        k = np.exp(-beta * t) * k0 + hm1**2 / (2.0 * beta) * (1 - np.exp(-beta * t))
        r = envelope_check(rows_from(t, k, k), p, NormSet(1, 1, hm1, 1), k0)
        assert r.c == pytest.approx(1.0, rel=1e-12)
        assert r.passed

    def test_decay_only(self):
        t = np.linspace(1, 10, 10)
        k = 5.0 * np.exp(-PARAMS.beta * t)
        r = envelope_check(rows_from(t, k, k), PARAMS, NormSet(1, 1, 1, 1), 5.0)
        assert r.c == 0.0

    def test_violation(self):
        t = np.linspace(1, 10, 10)
        r = envelope_check(rows_from(t, np.full(10, 1e6), t), PARAMS, NormSet(1, 1, 1e-3, 1), 0.0, c_max=10)
        assert not r.passed

    def test_needs_damping(self):
        p = ModelParams(nu=1.0, ell0=1.0, alpha=0.0, kappa=0.0, dt=1.0, t_end=1.0)
        with pytest.raises(ValueError):
            envelope_check([], p, NormSet(1, 1, 1, 1), 0.0)


class TestLinearGrowth:
    def test_linear_growth_at_bound(self):
        t = np.linspace(0.5, 10, 20)
        hm1 = 2.0
        r = linear_growth_check(rows_from(t, 1.0 + 0.5 * hm1**2 * t, t), 1.0, NormSet(1, 1, hm1, 1), 1.0)
        assert r.slope == pytest.approx(2.0)
        assert r.bound == pytest.approx(4.0)
        assert r.max_ratio == pytest.approx(0.5)
        assert r.passed

    def test_too_fast(self):
        t = np.linspace(0.5, 10, 20)
        r = linear_growth_check(rows_from(t, 10 * t, t), 1.0, NormSet(1, 1, 1.0, 1), 0.0)
        assert not r.passed


class TestDerived:
    def test_taylor_scale(self):
        assert taylor_scale(0.5, 2.0, 0.5) == pytest.approx(2.0)

    def test_ratios(self):
        from kolmodamp.diagnostics import Averages

        av = Averages(epsilon=2.0, U=4.0, drift=0.0, n_windows=3)
        r = kolmogorov_and_taylor(av, force(F=2.0, L=3.0, Gr=10.0), PARAMS)
        assert r["Re"] == pytest.approx(12.0)
        assert r["kolmogorov_ratio"] == pytest.approx(2.0 * 3.0 / 64.0)
        assert r["gr_re_ratio"] == pytest.approx(10.0 / 144.0)
        assert r["fl_u2_ratio"] == pytest.approx(6.0 / 16.0)
        assert r["lT"] == pytest.approx(math.sqrt(16.0 / 2.0))
        assert r["k41_taylor"] == pytest.approx(math.sqrt(8.0) * math.sqrt(12.0))

    def test_degenerate(self):
        from kolmodamp.diagnostics import Averages

        with pytest.raises(DegenerateRun):
            kolmogorov_and_taylor(Averages(0.0, 0.0, 0.0, 3), force(), PARAMS)

    def test_bounds(self):
        f = force(F=2.0, hm1=1.0)
        v = dissipation_bounds_check(1.0, 1.0, f, PARAMS, 2 * math.pi)
        assert v["eps_le_hm1"].passed and v["eps_le_hm1"].rhs == 1.0
        assert v["poincare_U"].lhs == pytest.approx(1.0)
        assert v["eps_le_FU"].passed
        assert v["FU_le_eps"].rhs == pytest.approx(400.0)
        # 1.05 allowance
        assert dissipation_bounds_check(1.04, 1.0, f, PARAMS, 100.0)["eps_le_hm1"].passed
        assert not dissipation_bounds_check(1.06, 1.0, f, PARAMS, 100.0)["eps_le_hm1"].passed

    def test_build_report_collects_verdicts(self):
        from kolmodamp.diagnostics import Averages, EnvelopeResult

        rep = build_report(Averages(0.5, 1.0, 0.0, 3), force(), PARAMS, 32.0, EnvelopeResult(2.0, True, 10.0, 0.1))
        assert set(rep.verdicts) >= {"eps_le_hm1", "poincare_U", "eps_le_FU", "envelope"}
        assert rep.envelope_c == 2.0


class TestConstants:
    """Closed forms on hand-checked inputs."""

    def test_a1_reference(self):
        tc = theoretical_constants(1.0, 1.0, 0.0, 1.0, 1.0)
        assert tc.a1 == pytest.approx(1 / 160000, rel=1e-15)
        assert tc.b1 == pytest.approx(1 / 160000 / 400, rel=1e-15)
        # c3 = 0: root = sqrt(4 c1) / (2 c1) = 1
        assert tc.a2 == pytest.approx(1.0)
        assert tc.b2 == tc.a2

    def test_a2_golden_ratio(self):
        # c0 = c1 = c3 = G0 = 1: root = (sqrt(5) - 1) / 2, so a2 = phi^2
        tc = theoretical_constants(1.0, 1.0, 1.0, 1.0, 1.0)
        phi = (1 + math.sqrt(5)) / 2
        assert tc.a2 == pytest.approx(phi**2, rel=1e-14)
        assert not tc.g0_condition  # 4 phi^2 > 1
        assert not tc.compat  # 1 > 4 is false

    def test_conditions_flip(self):
        tc = theoretical_constants(1.0, 10.0, 0.0, 1.0, 0.01)
        # a2 = c1 = 10 when c3 = 0; 4 * 10 * 0.01 = 0.4 <= 1
        assert tc.a2 == pytest.approx(10.0)
        assert tc.g0_condition
        assert not tc.compat


def point(ell, k=1.0):
    # self-consistent scaling: F ~ ell^1.5, L ~ ell^1.5, U ~ k ell^1.5, so Gr ~ ell^6
    L = ell**1.5
    F = ell**1.5
    U = k * ell**1.5
    Re = U * L
    eps = 0.5 * U**3 / L
    return SweepPoint(ell, Gr=F * L**3, Re=Re, U=U, epsilon=eps, F=F, L=L, lT=math.sqrt(U**2 / eps), ell0=1.0)


class TestSweep:
    def test_exact_power_laws(self):
        res = sweep_analysis([point(e) for e in (2.0, 4.0, 8.0, 16.0)])
        assert res.slopes["Gr"] == pytest.approx(6.0)
        assert res.slopes["U"] == pytest.approx(1.5)
        assert res.slopes["epsilon"] == pytest.approx(3.0)
        assert res.bands["fl_u2"] == pytest.approx(1.0)
        assert res.gr_span == pytest.approx(8.0**6)
        assert res.passed

    def test_insufficient(self):
        with pytest.raises(InsufficientSweep):
            sweep_analysis([point(e) for e in (2.0, 4.0, 8.0)])
        with pytest.raises(InsufficientSweep):
            sweep_analysis([point(e) for e in (2.0, 2.1, 2.2, 2.3)])

    def test_band_failure(self):
        pts = [point(e, k) for e, k in ((2.0, 1.0), (4.0, 1.0), (8.0, 1.0), (16.0, 6.0))]
        res = sweep_analysis(pts)
        assert not res.verdicts["band_fl_u2"].passed

    def test_band_width(self):
        assert band_width([2.0, 8.0, 4.0]) == 4.0
