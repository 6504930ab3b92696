"""Stationary, divergence-free, band-limited external force.

The force is a finite lattice sum of one smooth profile::

    f(x) = A * sum_k lambda_k * phi((x - theta*ell0*k) / (theta*ell0)),   max_j |k_j| <= ell / (theta*ell0)

The profile is defined on the Fourier side, phi_hat(eta) = N * chi(|eta|) * P_eta(o),
where chi is a C-infinity bump supported in 0.1 < |eta| < 1 with unit peak, P_eta is the
per-mode Leray projector and o is the orientation vector.  Scaled by
theta*ell0, the force spectrum sits in [1/(10 theta ell0), 1/(theta ell0)].

The lattice weights are lambda_k = cos(omega . k) with a carrier phase vector
omega (radians per lattice step).  The lattice sum then has the closed form

    Lambda(xi) = 1/2 * [prod_j D_K(theta ell0 xi_j - omega_j) + prod_j D_K(theta ell0 xi_j + omega_j)]

with the Dirichlet kernel D_K(x) = sin((K + 1/2) x) / sin(x / 2).  omega = 0
gives uniform weights.  A nonzero carrier lets neighbouring translates add
coherently, so that in the interior of a large lattice the force is a
plane wave of amplitude about ``gain * chi(|omega|) * A`` and the
sup-norm stays flat as ell grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GammaExceedsOne, LatticeOverflow, UnresolvedAnnulus
from .spectral_core import GridSpec, NormSet, SpectralField, basis, norms, to_physical_array

ANNULUS_LO = 0.1
ANNULUS_HI = 1.0


@dataclass(frozen=True)
class ProfileSpec:
    """Shape parameters of the force profile phi."""

    theta: float = 1.0
    bump_sharpness: float = 1.0
    orientation: tuple[float, float, float] = (0.0, 0.0, 1.0)
    seed: int = 0
    carrier: tuple[float, float, float] = (0.4, 0.0, 0.0)
    gain: float = 0.1

    def __post_init__(self):
        if not self.theta >= 1:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        if not self.bump_sharpness > 0:
            raise ValueError("bump_sharpness must be positive")
        o = np.asarray(self.orientation, dtype=float)
        if o.shape != (3,) or not np.linalg.norm(o) > 0:
            raise ValueError("orientation must be a nonzero 3-vector")
        norm = float(np.linalg.norm(o))
        if abs(norm - 1.0) > 1e-12:  # leave unit vectors bit-identical so configs round-trip
            o = o / norm
        object.__setattr__(self, "orientation", tuple(float(x) for x in o))
        w = np.asarray(self.carrier, dtype=float)
        if w.shape != (3,):
            raise ValueError("carrier must be a 3-vector")
        object.__setattr__(self, "carrier", tuple(float(x) for x in w))
        if not self.gain > 0:
            raise ValueError("gain must be positive")


@dataclass(frozen=True)
class ForceSpec:
    """Lattice geometry and amplitude of the assembled force."""

    profile: ProfileSpec
    ell0: float
    ell: float
    amplitude: float
    nu: float

    def __post_init__(self):
        for name in ("ell0", "ell", "amplitude", "nu"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def damped_default(cls, profile: ProfileSpec, ell0: float, ell: float, nu: float) -> ForceSpec:
        """Amplitude A = nu^2 / ell0^3."""
        return cls(profile, ell0, ell, nu**2 / ell0**3, nu)

    @property
    def spacing(self) -> float:
        """Lattice spacing theta * ell0."""
        return self.profile.theta * self.ell0

    @property
    def half_count(self) -> int:
        """K such that lattice indices run over -K..K on each axis."""
        return int(math.floor(self.ell / self.spacing + 1e-9))

    def tiles(self, box_len: float) -> bool:
        """True when both ell and theta*ell0 divide box_len / 2."""
        return _divides(self.ell, box_len / 2) and _divides(self.spacing, box_len / 2)


def _divides(a: float, b: float) -> bool:
    q = b / a
    return abs(q - round(q)) < 1e-9 * max(1.0, abs(q))


@dataclass(frozen=True)
class BernsteinConstants:
    c0: float
    c1: float
    c2: float
    c3: float
    c3_small: bool
    compat: bool


@dataclass(frozen=True)
class ForceNumbers:
    c0: float
    gamma: float
    L: float
    F: float
    G0: float
    Gr: float
    c1: float
    c2: float
    c3: float
    c3_small: bool = False
    compat: bool = False
    norms: NormSet = field(default=NormSet(0.0, 0.0, 0.0, 0.0))
    ell: float = 0.0
    ell0: float = 1.0
    theta: float = 1.0
    nu: float = 1.0


def bump(r: np.ndarray, sharpness: float = 1.0) -> np.ndarray:
    """Radial bump, 1 at r = 0.55 and identically zero outside (0.1, 1)."""
    r = np.asarray(r, dtype=float)
    t = (2 * r - (ANNULUS_LO + ANNULUS_HI)) / (ANNULUS_HI - ANNULUS_LO)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    ti = t[inside]
    out[inside] = np.exp(sharpness * (1.0 - 1.0 / (1.0 - ti * ti)))
    return out


def dirichlet(x: np.ndarray, K: int) -> np.ndarray:
    """sum_{k=-K}^{K} exp(-i k x) = sin((K + 1/2) x) / sin(x / 2)."""
    x = np.asarray(x, dtype=float)
    s = np.sin(0.5 * x)
    small = np.abs(s) < 1e-6
    out = np.empty_like(x)
    out[~small] = np.sin((K + 0.5) * x[~small]) / s[~small]
    if small.any():
        ks = np.arange(1, K + 1)
        out[small] = 1.0 + 2.0 * np.cos(np.outer(x[small], ks)).sum(axis=1)
    return out


def annulus_shells(grid: GridSpec, theta: float, ell0: float) -> list[float]:
    """Distinct retained |xi| values inside [1/(10 theta ell0), 1/(theta ell0)]."""
    kmax = grid.max_index
    m = np.arange(-kmax, kmax + 1)
    s = (m[:, None, None] ** 2 + m[None, :, None] ** 2 + m[None, None, :] ** 2).ravel()
    lo2 = (ANNULUS_LO / (theta * ell0) / grid.dk) ** 2
    hi2 = (ANNULUS_HI / (theta * ell0) / grid.dk) ** 2
    vals = np.unique(s[(s >= lo2 * (1 - 1e-12)) & (s <= hi2 * (1 + 1e-12)) & (s > 0)])
    return [grid.dk * math.sqrt(v) for v in vals]


def build_profile(spec: ProfileSpec, grid: GridSpec, ell0: float) -> SpectralField:
    """Coefficients of phi(x / (theta ell0)) centred at the origin (no amplitude A)."""
    shells = annulus_shells(grid, spec.theta, ell0)
    if len(shells) < 3:
        raise UnresolvedAnnulus(
            f"only {len(shells)} spectral shells inside the force annulus; "
            f"increase box_len or n (theta*ell0={spec.theta * ell0}, dk={grid.dk:.4g})"
        )
    b = basis(grid)
    a = spec.theta * ell0
    o = np.asarray(spec.orientation)
    chi = bump(b.kmag * a, spec.bump_sharpness) * b.retained
    kdoto = np.einsum("i...,i->...", b.k, o)
    pol = o[:, None, None, None] - b.k * (kdoto * b.inv_k2)
    # continuous transform of phi(x/a) is a^3 * Phi(a xi); series coefficient divides by box^3
    scale = spec.gain * (a / grid.box_len) ** 3
    c = (scale * chi) * pol
    return SpectralField(grid, c.astype(np.complex128))


def lattice_factor(spec: ForceSpec, grid: GridSpec) -> np.ndarray:
    """Lambda(xi) on the half grid (real and even in xi)."""
    K = spec.half_count
    a = spec.spacing
    dk = grid.dk
    m = np.fft.fftfreq(grid.n, 1.0 / grid.n)
    mz = np.arange(grid.n // 2 + 1, dtype=float)
    w = spec.profile.carrier
    axes = (m, m, mz)

    def product(sign: float) -> np.ndarray:
        d = [dirichlet(a * dk * ax - sign * w[j], K) for j, ax in enumerate(axes)]
        return d[0][:, None, None] * d[1][None, :, None] * d[2][None, None, :]

    return 0.5 * (product(1.0) + product(-1.0))


def assemble_force(spec: ForceSpec, grid: GridSpec, profile: SpectralField | None = None) -> SpectralField:
    """A * sum_k lambda_k phi((x - theta ell0 k)/(theta ell0)) as a spectral field."""
    if 2 * spec.ell + spec.spacing > grid.box_len * (1 + 1e-12):
        raise LatticeOverflow(
            f"2*ell + theta*ell0 = {2 * spec.ell + spec.spacing:g} exceeds box_len = {grid.box_len:g}"
        )
    if profile is None:
        profile = build_profile(spec.profile, grid, spec.ell0)
    lam = lattice_factor(spec, grid)
    return SpectralField(grid, (spec.amplitude * lam) * profile.coeffs)


def gradient_linf(f: SpectralField) -> float:
    """max_x of the Frobenius norm of grad (x) f."""
    b = f.basis
    grads = np.empty((9,) + b.k2.shape, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            grads[3 * i + j] = 1j * b.k[j] * f.coeffs[i]
    g = to_physical_array(grads, f.grid)
    return float(np.sqrt((g**2).sum(axis=0)).max())


def laplacian_l2(f: SpectralField) -> float:
    b = f.basis
    a = (np.abs(f.coeffs) ** 2).sum(axis=0) * b.k2**2
    return math.sqrt(f.grid.volume * b.wsum(a))


def technical_condition(c2: float, theta: float) -> bool:
    """c3 = c2 / theta^2 < 1/2."""
    return c2 / theta**2 < 0.5


def compatibility(G0: float, c0: float, c1: float, c3: float) -> bool:
    """G0 > c0 (1 + sqrt(c3))^2 / c1."""
    return G0 > c0 * (1 + math.sqrt(c3)) ** 2 / c1


def calibrate_bernstein(
    profile: SpectralField, spec: ForceSpec, force: SpectralField | None = None
) -> BernsteinConstants:
    """c0 from the single translate (so that gamma = 1 there), c1..c3 measured on the force."""
    ref = norms(profile)
    c0 = ref.linf * spec.ell0**1.5 / ref.l2
    if force is None:
        force = assemble_force(spec, profile.grid, profile)
    fn = norms(force)
    gamma = fn.linf * spec.ell0**1.5 / (c0 * fn.l2)
    L = spec.ell0 / gamma
    F = fn.l2 / spec.ell0**1.5
    c1 = gradient_linf(force) * L / F
    theta = spec.profile.theta
    c2 = laplacian_l2(force) * theta**2 * gamma**2 * L**2 / (spec.ell0**1.5 * F)
    c3 = c2 / theta**2
    G0 = fn.linf * spec.ell0**3 / spec.nu**2
    return BernsteinConstants(c0, c1, c2, c3, technical_condition(c2, theta), compatibility(G0, c0, c1, c3))


def derive_numbers(f: SpectralField, spec: ForceSpec, constants: BernsteinConstants | float) -> ForceNumbers:
    """gamma, L, F, G0, Gr for an assembled force, given calibrated constants (or c0 alone)."""
    if isinstance(constants, BernsteinConstants):
        c0, c1, c2, c3 = constants.c0, constants.c1, constants.c2, constants.c3
        c3_small, compat = constants.c3_small, constants.compat
    else:
        c0, c1, c2, c3 = float(constants), math.nan, math.nan, math.nan
        c3_small = compat = False
    fn = norms(f)
    ell0, nu = spec.ell0, spec.nu
    gamma = fn.linf / (c0 * ell0**-1.5 * fn.l2)
    if gamma > 1 + 1e-9:
        raise GammaExceedsOne(f"gamma = {gamma:.6g} > 1; c0 = {c0:.6g} is miscalibrated")
    L = ell0 / gamma
    F = fn.l2 / ell0**1.5
    G0 = fn.linf * ell0**3 / nu**2
    Gr = F * L**3 / nu**2
    return ForceNumbers(
        c0=c0, gamma=gamma, L=L, F=F, G0=G0, Gr=Gr, c1=c1, c2=c2, c3=c3,
        c3_small=c3_small, compat=compat, norms=fn,
        ell=spec.ell, ell0=ell0, theta=spec.profile.theta, nu=nu,
    )


def force_numbers(spec: ForceSpec, grid: GridSpec) -> tuple[SpectralField, ForceNumbers]:
    """Build, assemble, calibrate and derive in one call."""
    profile = build_profile(spec.profile, grid, spec.ell0)
    f = assemble_force(spec, grid, profile)
    consts = calibrate_bernstein(profile, spec, f)
    return f, derive_numbers(f, spec, consts)
