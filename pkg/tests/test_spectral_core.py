import math

import numpy as np
import pytest

from kolmodamp.errors import DivergenceError
from kolmodamp.spectral_core import (
    GridSpec,
    SpectralField,
    band_pass,
    inner,
    leray_project,
    low_pass,
    nonlinear_term,
    norms,
    random_field,
    single_mode,
)


@pytest.fixture
def grid16():
    return GridSpec(16, 2 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def physical_energy(v: SpectralField) -> float:
    """Oracle: midpoint quadrature of |u|^2 over the box (exact for trig polynomials)."""
    u = v.to_physical()
    return float((u**2).sum()) * v.grid.dx**3


def dense_cube(v: SpectralField, kmax: int) -> np.ndarray:
    """Full-spectrum coefficients on indices -kmax..kmax, from a complex FFT of the physical field."""
    n = v.grid.n
    full = np.fft.fftn(v.to_physical(), axes=(1, 2, 3)) / n**3
    idx = np.arange(-kmax, kmax + 1) % n
    return full[:, idx][:, :, idx][:, :, :, idx]


class TestGrid:
    """Index bookkeeping of the dealiased grid."""

    @pytest.mark.parametrize("n,expected", [(16, 5), (32, 10), (48, 15), (64, 21)])
    def test_max_index(self, n, expected):
        # largest integer strictly below n/3
        assert GridSpec(n, 1.0).max_index == expected

    def test_rejects_odd(self):
        with pytest.raises(ValueError):
            GridSpec(15, 1.0)

    def test_dk_dx(self):
        g = GridSpec(32, 8.0)
        assert g.dk == pytest.approx(2 * math.pi / 8.0)
        assert g.dx == 0.25


class TestFieldBasics:
    def test_from_physical_masks_mean_and_aliases(self, grid16, rng):
        u = rng.standard_normal((3, 16, 16, 16)) + 3.0
        v = SpectralField.from_physical(grid16, u)
        assert v.is_mean_free()
        assert v.is_hermitian(1e-12)
        kmax = grid16.max_index
        m = np.fft.fftfreq(16, 1 / 16)
        bad = np.abs(m) > kmax
        assert np.all(v.coeffs[:, bad] == 0)

    def test_coeffs_read_only(self, grid16):
        v = SpectralField.zeros(grid16)
        with pytest.raises(ValueError):
            v.coeffs[0, 1, 1, 1] = 1.0

    def test_single_mode_matches_sine(self):
        g = GridSpec(16, 4.0)
        a = np.array([0.3, -0.2, 0.1])
        m = (1, -2, 3)
        v = single_mode(g, m, a)
        x = np.arange(16) * g.dx
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        phase = g.dk * (m[0] * X + m[1] * Y + m[2] * Z)
        expect = a[:, None, None, None] * np.sin(phase)[None]
        np.testing.assert_allclose(v.to_physical(), expect, atol=1e-14)

    def test_single_mode_needs_positive_kz(self, grid16):
        with pytest.raises(ValueError):
            single_mode(grid16, (1, 0, 0), np.ones(3))


class TestNorms:
    """Volume-weighted norms against closed forms and physical quadrature."""

    def test_plancherel(self, rng):
        g = GridSpec(16, 3.0)
        v = random_field(g, rng, solenoidal=False)
        assert norms(v).l2 ** 2 == pytest.approx(physical_energy(v), rel=1e-12)

    def test_single_mode_norms(self):
        g = GridSpec(16, 5.0)
        a = np.array([1.0, 0.0, 0.0])
        v = single_mode(g, (0, 1, 2), a)
        k2 = g.dk**2 * 5
        vol = 125.0
        ns = norms(v)
        # mean of sin^2 is 1/2
        assert ns.l2**2 == pytest.approx(0.5 * vol, rel=1e-13)
        assert ns.h1**2 == pytest.approx(0.5 * vol * k2, rel=1e-13)
        assert ns.hm1**2 == pytest.approx(0.5 * vol / k2, rel=1e-13)
        assert ns.linf == pytest.approx(1.0, abs=1e-2)

    def test_inner_polarisation(self, grid16, rng):
        v = random_field(grid16, rng)
        w = random_field(grid16, rng)
        lhs = inner(v, w)
        rhs = 0.25 * (norms(v + w).l2 ** 2 - norms(v - w).l2 ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestProjections:
    def test_leray_idempotent_and_solenoidal(self, grid16, rng):
        v = random_field(grid16, rng, solenoidal=False)
        p = leray_project(v)
        assert v.divergence_ratio() > 0.1
        assert p.divergence_ratio() < 1e-14
        np.testing.assert_allclose(leray_project(p).coeffs, p.coeffs, atol=1e-16)

    def test_leray_orthogonal_split(self, grid16, rng):
        v = random_field(grid16, rng, solenoidal=False)
        p = leray_project(v)
        assert abs(inner(p, v - p)) < 1e-12 * norms(v).l2 ** 2

    def test_low_pass_partition(self, grid16, rng):
        v = random_field(grid16, rng)
        low = low_pass(v, 2.5)
        high = v - low
        e = norms(v).l2 ** 2
        assert norms(low).l2 ** 2 + norms(high).l2 ** 2 == pytest.approx(e, rel=1e-13)
        assert np.all(low.coeffs[:, low.basis.kmag >= 2.5] == 0)

    def test_low_pass_strict_boundary(self, grid16):
        v = single_mode(grid16, (0, 0, 2), np.array([1.0, 0, 0]))
        assert norms(low_pass(v, 2.0)).l2 == 0.0
        assert norms(low_pass(v, 2.0 + 1e-9)).l2 > 0

    def test_band_pass_closed(self, grid16):
        v = single_mode(grid16, (0, 0, 2), np.array([1.0, 0, 0]))
        assert norms(band_pass(v, 2.0, 3.0)).l2 == norms(v).l2
        assert norms(band_pass(v, 2.0 + 1e-9, 3.0)).l2 == 0.0

    def test_random_field_band_and_energy(self, grid16, rng):
        v = random_field(grid16, rng, 1.0, 2.0, energy=3.5)
        assert norms(v).l2 ** 2 == pytest.approx(3.5, rel=1e-12)
        km = v.basis.kmag
        outside = (km < 1.0) | (km > 2.0)
        assert np.all(v.coeffs[:, outside] == 0)
        assert v.divergence_ratio() < 1e-13


class TestNonlinear:
    """P((u.grad)u) against a brute-force triadic sum."""

    def test_energy_neutral(self, rng):
        g = GridSpec(32, 2 * math.pi)
        u = random_field(g, rng, energy=1.0)
        n = nonlinear_term(u)
        rel = abs(inner(n, u)) / (norms(n).l2 * norms(u).l2)
        assert rel < 1e-8

    def test_mollified_energy_neutral(self, grid16, rng):
        u = random_field(grid16, rng, energy=1.0)
        n = nonlinear_term(u, delta=0.3)
        assert abs(inner(n, u)) / (norms(n).l2 * norms(u).l2) < 1e-8

    def test_rejects_divergent_input(self, grid16, rng):
        v = random_field(grid16, rng, solenoidal=False)
        with pytest.raises(DivergenceError):
            nonlinear_term(v)

    def test_convolution_oracle(self, grid16, rng):
        g = grid16
        u = random_field(g, rng, energy=1.0)
        km = g.max_index
        d = 2 * km + 1
        U = dense_cube(u, km)
        ax = np.arange(-km, km + 1) * g.dk
        K = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"))
        # (u.grad u)_hat(k) = sum_{p+q=k} (u(p) . i q) u(q), on a (2d-1)^3 output cube
        out = np.zeros((3, 2 * d - 1, 2 * d - 1, 2 * d - 1), dtype=complex)
        for a in range(d):
            for b_ in range(d):
                for c in range(d):
                    up = U[:, a, b_, c]
                    if not np.any(up):
                        continue
                    s = np.einsum("i,ixyz->xyz", up, 1j * K)
                    out[:, a : a + d, b_ : b_ + d, c : c + d] += s[None] * U
        inner_cube = out[:, km : km + d, km : km + d, km : km + d]
        k2 = (K**2).sum(axis=0)
        k2[km, km, km] = 1.0
        proj = inner_cube - K * np.einsum("ixyz,ixyz->xyz", K, inner_cube) / k2
        proj[:, km, km, km] = 0
        got = dense_cube(nonlinear_term(u), km)
        err = np.max(np.abs(got - proj)) / np.max(np.abs(proj))
        assert err < 1e-10
