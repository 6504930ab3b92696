"""Fourier-space vector fields on a periodic cube.

Coefficients are Fourier-series coefficients stored in the real-FFT layout
``(3, n, n, n // 2 + 1)``, i.e. ``c = rfftn(u) / n**3`` along the last three
axes.  Axis ``m`` carries wavenumber ``2*pi*m/box_len`` with ``m`` in
``fftfreq`` order.  The half-spectrum is expanded implicitly: every mode with
``0 < kz < n/2`` stands for itself and its conjugate partner, so sums over the
full spectrum use weight 2 on those planes and weight 1 on ``kz = 0``.

Norm convention (volume factor included so that L2 norms mimic whole-space
integrals)::

    ||u||_{L2}^2  = box_len**3 * sum |c(xi)|^2
    ||u||_{H1}^2  = box_len**3 * sum |xi|^2 |c(xi)|^2
    ||u||_{H-1}^2 = box_len**3 * sum |xi|^-2 |c(xi)|^2

Dealiasing keeps ``|m| < dealias_fraction * n / 2`` on every axis.  The
inequality is strict so that 2/3 truncation stays alias-free when ``n`` is a
multiple of three; the Nyquist index is always dropped.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.fft as sfft

from .errors import DivergenceError

TOL_DIV = 1e-10
TOL_ENERGY = 1e-8
DIV_FLOOR = 1e-4

_FFT_WORKERS = 1


def set_fft_workers(workers: int | None) -> int:
    """Set the thread count used by every transform; returns the value in effect."""
    global _FFT_WORKERS
    if workers is None:
        workers = int(os.environ.get("KOLMODAMP_THREADS", "1") or 1)
    _FFT_WORKERS = max(1, int(workers))
    return _FFT_WORKERS


def fft_workers() -> int:
    return _FFT_WORKERS


@dataclass(frozen=True)
class GridSpec:
    """Periodic cube of side ``box_len`` sampled with ``n`` points per axis."""

    n: int
    box_len: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 4 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 4, got {self.n!r}")
        if not (self.box_len > 0 and math.isfinite(self.box_len)):
            raise ValueError(f"box_len must be positive, got {self.box_len!r}")
        if not (0 < self.dealias_fraction <= 1):
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction!r}")

    @property
    def dk(self) -> float:
        """Smallest nonzero wavenumber 2*pi/box_len."""
        return 2 * math.pi / self.box_len

    @property
    def dx(self) -> float:
        return self.box_len / self.n

    @property
    def max_index(self) -> int:
        """Largest retained |m| per axis."""
        return min(math.ceil(self.dealias_fraction * self.n / 2) - 1, self.n // 2 - 1)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (3, self.n, self.n, self.n // 2 + 1)

    @property
    def volume(self) -> float:
        return self.box_len**3


class Basis:
    """Wavenumber arrays for one grid, built once and shared read-only."""

    def __init__(self, grid: GridSpec):
        n = grid.n
        m = np.fft.fftfreq(n, 1.0 / n)
        mz = np.arange(n // 2 + 1, dtype=float)
        self.grid = grid
        self.m = (m[:, None, None], m[None, :, None], mz[None, None, :])
        dk = grid.dk
        kx, ky, kz = np.broadcast_arrays(dk * m[:, None, None], dk * m[None, :, None], dk * mz[None, None, :])
        self.k = np.stack([kx, ky, kz])
        # broadcastable per-axis views, cheaper than the full arrays in hot loops
        self.k1 = (dk * m[:, None, None], dk * m[None, :, None], dk * mz[None, None, :])
        self.k2 = (self.k**2).sum(axis=0)
        self.kmag = np.sqrt(self.k2)
        self.inv_k2 = np.zeros_like(self.k2)
        nz = self.k2 > 0
        self.inv_k2[nz] = 1.0 / self.k2[nz]
        kmax = grid.max_index
        mx, my, mzz = np.broadcast_arrays(*self.m)
        dealias = (np.abs(mx) <= kmax) & (np.abs(my) <= kmax) & (mzz <= kmax)
        dealias[0, 0, 0] = False
        self.retained = dealias
        self.retained_f = dealias.astype(float)
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.weight = np.broadcast_to(w[None, None, :], self.k2.shape)
        for arr in (self.k, self.k2, self.kmag, self.inv_k2, self.retained, self.retained_f):
            arr.flags.writeable = False

    def wsum(self, a: np.ndarray) -> float:
        """Full-spectrum sum of a real per-mode quantity given on the half grid."""
        return float(np.sum(self.weight * a))


@lru_cache(maxsize=16)
def basis(grid: GridSpec) -> Basis:
    return Basis(grid)


# ---------------------------------------------------------------------------
# raw array kernels (used by the stepper on its hot path)


def to_physical_array(c: np.ndarray, grid: GridSpec) -> np.ndarray:
    n = grid.n
    return sfft.irfftn(c, s=(n, n, n), axes=(-3, -2, -1), norm="forward", workers=_FFT_WORKERS)


def from_physical_array(u: np.ndarray) -> np.ndarray:
    return sfft.rfftn(u, axes=(-3, -2, -1), norm="forward", workers=_FFT_WORKERS)


def leray_array(c: np.ndarray, b: Basis) -> np.ndarray:
    kx, ky, kz = b.k1
    tmp = (kx * c[0] + ky * c[1] + kz * c[2]) * b.inv_k2
    out = np.empty_like(c)
    np.subtract(c[0], kx * tmp, out=out[0])
    np.subtract(c[1], ky * tmp, out=out[1])
    np.subtract(c[2], kz * tmp, out=out[2])
    return out


def energy_array(c: np.ndarray, b: Basis, multiplier: np.ndarray | None = None) -> float:
    """box^3 * sum(multiplier * |c|^2) over the full spectrum."""
    a = (c.real**2 + c.imag**2).sum(axis=0)
    if multiplier is not None:
        a = a * multiplier
    return b.grid.volume * b.wsum(a)


def inner_array(a: np.ndarray, c: np.ndarray, b: Basis) -> float:
    """Real L2 inner product <a, c> with the volume factor."""
    prod = (a.real * c.real + a.imag * c.imag).sum(axis=0)
    return b.grid.volume * b.wsum(prod)


def divergence_ratio_array(c: np.ndarray, b: Basis) -> float:
    """max over modes of |xi_hat . c| / max(|c|, floor), dimensionless.

    A mode that should vanish exactly (say P_xi o with xi parallel to o) is
    left holding pure round-off, whose direction is arbitrary.  Such modes
    are measured against ``floor = DIV_FLOOR * max|c|`` instead of their own
    size, so the check stays per-mode for every coefficient that carries
    information.
    """
    mag = np.sqrt((np.abs(c) ** 2).sum(axis=0))
    top = float(mag.max(initial=0.0))
    if top == 0:
        return 0.0
    kdotc = np.abs(np.einsum("i...,i...->...", b.k, c)) * np.sqrt(b.inv_k2)
    return float((kdotc / np.maximum(mag, DIV_FLOOR * top)).max())


def mollifier_multiplier(b: Basis, delta: float) -> np.ndarray:
    """Gaussian smoothing multiplier exp(-delta^2 |xi|^2 / 2)."""
    return np.exp(-0.5 * delta**2 * b.k2)


def nonlinear_array(c: np.ndarray, b: Basis, delta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Return (P((a.grad) u) coefficients, physical u).

    ``a`` is ``u`` itself, or its Gaussian-mollified copy when ``delta > 0``.
    The divergence form div(a (x) u) is used; it equals (a.grad) u because
    ``a`` is divergence-free, and with exact 2/3 truncation the product is
    alias-free, so the result is energy-neutral to round-off.
    """
    grid = b.grid
    u = to_physical_array(c, grid)
    kx, ky, kz = (1j * k for k in b.k1)
    out = np.empty_like(c)
    if delta > 0:
        a = to_physical_array(c * mollifier_multiplier(b, delta), grid)
        prod = np.empty((9,) + u.shape[1:])
        for i in range(3):
            for j in range(3):
                prod[3 * i + j] = a[j] * u[i]
        ph = from_physical_array(prod)
        for i in range(3):
            out[i] = kx * ph[3 * i] + ky * ph[3 * i + 1] + kz * ph[3 * i + 2]
    else:
        prod = np.empty((6,) + u.shape[1:])
        pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
        for p, (i, j) in enumerate(pairs):
            np.multiply(u[i], u[j], out=prod[p])
        ph = from_physical_array(prod)
        xx, yy, zz, xy, xz, yz = ph
        out[0] = kx * xx + ky * xy + kz * xz
        out[1] = kx * xy + ky * yy + kz * yz
        out[2] = kx * xz + ky * yz + kz * zz
    out *= b.retained_f
    return leray_array(out, b), u


# ---------------------------------------------------------------------------
# public field type


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable 3-vector field given by its half-spectrum Fourier coefficients."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = self.coeffs
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        if c.dtype != np.complex128:
            raise TypeError("coefficients must be complex128")
        c.flags.writeable = False

    # constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, grid: GridSpec) -> SpectralField:
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_coeffs(cls, grid: GridSpec, coeffs: np.ndarray) -> SpectralField:
        """Copy ``coeffs`` and zero the mean and all non-retained modes."""
        c = np.array(coeffs, dtype=np.complex128, copy=True)
        c *= basis(grid).retained_f
        return cls(grid, c)

    @classmethod
    def from_physical(cls, grid: GridSpec, u: np.ndarray) -> SpectralField:
        u = np.asarray(u, dtype=float)
        if u.shape != (3, grid.n, grid.n, grid.n):
            raise ValueError(f"physical field must have shape (3, n, n, n), got {u.shape}")
        c = from_physical_array(u)
        c *= basis(grid).retained_f
        return cls(grid, c)

    # views --------------------------------------------------------------
    @property
    def basis(self) -> Basis:
        return basis(self.grid)

    def to_physical(self) -> np.ndarray:
        return to_physical_array(self.coeffs, self.grid)

    def divergence_ratio(self) -> float:
        return divergence_ratio_array(self.coeffs, self.basis)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        """Check conjugate symmetry of the self-paired planes kz = 0 and kz = n/2."""
        n = self.grid.n
        neg = (-np.arange(n)) % n
        for plane in (0, n // 2):
            p = self.coeffs[:, :, :, plane]
            q = np.conj(p[:, neg][:, :, neg])
            if np.max(np.abs(p - q), initial=0.0) > tol * max(1.0, float(np.max(np.abs(p), initial=0.0))):
                return False
        return True

    def is_mean_free(self) -> bool:
        return bool(np.all(self.coeffs[:, 0, 0, 0] == 0))

    # arithmetic ---------------------------------------------------------
    def _check(self, other: SpectralField):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, s: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs * complex(s))

    __rmul__ = __mul__

    def __neg__(self) -> SpectralField:
        return SpectralField(self.grid, -self.coeffs)


class NormSet(NamedTuple):
    l2: float
    h1: float
    hm1: float
    linf: float


def leray_project(v: SpectralField) -> SpectralField:
    """Remove the gradient part: c <- c - xi (xi . c) / |xi|^2."""
    return SpectralField(v.grid, leray_array(v.coeffs, v.basis))


def low_pass(v: SpectralField, kappa: float) -> SpectralField:
    """Keep modes with |xi| < kappa (sharp indicator, ties excluded)."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    keep = v.basis.kmag < kappa
    return SpectralField(v.grid, v.coeffs * keep)


def band_pass(v: SpectralField, lo: float, hi: float) -> SpectralField:
    """Keep modes with lo <= |xi| <= hi."""
    if not (0 < lo < hi):
        raise ValueError("band_pass needs 0 < lo < hi")
    km = v.basis.kmag
    keep = (km >= lo) & (km <= hi)
    return SpectralField(v.grid, v.coeffs * keep)


def inner(v: SpectralField, w: SpectralField) -> float:
    v._check(w)
    return inner_array(v.coeffs, w.coeffs, v.basis)


def norms(v: SpectralField) -> NormSet:
    b = v.basis
    l2 = energy_array(v.coeffs, b)
    h1 = energy_array(v.coeffs, b, b.k2)
    hm1 = energy_array(v.coeffs, b, b.inv_k2)
    u = v.to_physical()
    linf = float(np.sqrt((u**2).sum(axis=0)).max())
    return NormSet(math.sqrt(l2), math.sqrt(h1), math.sqrt(hm1), linf)


def nonlinear_term(u: SpectralField, delta: float = 0.0) -> SpectralField:
    """P((u.grad) u), or P(((phi_delta * u).grad) u) when delta > 0."""
    ratio = u.divergence_ratio()
    if ratio > TOL_DIV:
        raise DivergenceError(f"nonlinear_term needs a divergence-free input (ratio {ratio:.3e})")
    out, _ = nonlinear_array(u.coeffs, u.basis, delta)
    return SpectralField(u.grid, out)


def random_field(
    grid: GridSpec,
    rng: np.random.Generator,
    k_lo: float = 0.0,
    k_hi: float = math.inf,
    energy: float | None = None,
    solenoidal: bool = True,
) -> SpectralField:
    """Random real field restricted to lo <= |xi| <= hi and the dealiased set.

    Drawn as white noise in physical space, so the conjugate symmetry of the
    self-paired planes holds by construction.  ``energy`` rescales ||v||_{L2}^2.
    """
    noise = rng.standard_normal((3, grid.n, grid.n, grid.n))
    c = from_physical_array(noise)
    b = basis(grid)
    keep = b.retained & (b.kmag >= k_lo) & (b.kmag <= k_hi)
    c = c * keep
    if solenoidal:
        c = leray_array(c, b)
    if energy is not None:
        e = energy_array(c, b)
        if e > 0:
            c = c * math.sqrt(energy / e)
    return SpectralField(grid, c)


def single_mode(grid: GridSpec, m: tuple[int, int, int], amplitude: np.ndarray) -> SpectralField:
    """Real field amplitude * sin(k . x) for integer mode index ``m``.

    ``m[2]`` must be positive so the mode lives in the stored half-spectrum
    without a self-paired partner.
    """
    n = grid.n
    if m[2] <= 0 or m[2] >= n // 2:
        raise ValueError("single_mode needs 0 < m_z < n/2")
    c = np.zeros(grid.shape, dtype=np.complex128)
    a = np.asarray(amplitude, dtype=float)
    # sin(k.x) = (e^{ikx} - e^{-ikx}) / (2i): stored coefficient is a / (2i)
    c[:, m[0] % n, m[1] % n, m[2]] = a / 2j
    return SpectralField(grid, c)
