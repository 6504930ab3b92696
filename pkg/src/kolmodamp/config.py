"""Experiment configuration: a flat INI-style text format.

Grammar
-------
Sections in square brackets, one ``key = value`` per line, ``#`` or ``;``
starts a comment line.  Values are numbers, words, or whitespace-separated
lists of numbers.  Unknown sections or keys are rejected.

::

    [run]        mode (damped-default | damped-custom | classical | mollified), seed
    [grid]       n, box_len, dealias_fraction
    [model]      nu, ell0, theta, alpha, kappa, delta, dt, t_end, cfl_limit
    [force]      ell, amplitude, bump_sharpness, orientation, carrier, gain
    [initial]    kind (zero | random), energy, k_lo, k_hi
    [averaging]  burn_in, window, stride, c_max, band_max
    [sweep]      ells, workers
    [io]         snapshot_every, checkpoint_every   (in steps, 0 = never)

In damped-default mode alpha and kappa are derived (alpha = nu/ell0^2,
kappa = 1/(20 theta ell0)) and giving either one is an error.  Omitted
averaging times default to burn_in = 5/beta and window = 1/beta, with beta
taken from the damped-default alpha and kappa when the run itself has none.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field, replace

from .diagnostics import AveragingPolicy
from .dynamics import ModelParams
from .errors import ConfigError
from .forcing import ForceSpec, ProfileSpec
from .spectral_core import GridSpec

MODES = ("damped-default", "damped-custom", "classical", "mollified")

SCHEMA: dict[str, tuple[str, ...]] = {
    "run": ("mode", "seed"),
    "grid": ("n", "box_len", "dealias_fraction"),
    "model": ("nu", "ell0", "theta", "alpha", "kappa", "delta", "dt", "t_end", "cfl_limit"),
    "force": ("ell", "amplitude", "bump_sharpness", "orientation", "carrier", "gain"),
    "initial": ("kind", "energy", "k_lo", "k_hi"),
    "averaging": ("burn_in", "window", "stride", "c_max", "band_max"),
    "sweep": ("ells", "workers"),
    "io": ("snapshot_every", "checkpoint_every"),
}


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "zero"
    energy: float = 0.0
    k_lo: float = 0.0
    k_hi: float = math.inf


@dataclass(frozen=True)
class IoSpec:
    snapshot_every: int = 0
    checkpoint_every: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    seed: int
    grid: GridSpec
    model: ModelParams
    profile: ProfileSpec
    force: ForceSpec
    averaging: AveragingPolicy
    initial: InitialSpec = InitialSpec()
    io: IoSpec = IoSpec()
    sweep: tuple[float, ...] = ()
    sweep_workers: int = 1
    c_max: float = 10.0
    band_max: float = 5.0
    _explicit: frozenset = field(default=frozenset(), compare=False, repr=False)

    def with_ell(self, ell: float) -> ExperimentConfig:
        """Same experiment with a different lattice half-width (used by sweeps)."""
        force = replace(self.force, ell=float(ell))
        _check_tiling(self.grid, force, "force.ell")
        return replace(self, force=force, sweep=())

    def digest(self) -> str:
        return hashlib.sha256(serialize(self).encode("utf-8")).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(_fmt(float(x)) for x in v)
    return str(v)


def serialize(cfg: ExperimentConfig) -> str:
    """Canonical text; parse(serialize(c)) == c and serialize is a fixed point."""
    m, fs, pr = cfg.model, cfg.force, cfg.profile
    sections: list[tuple[str, list[tuple[str, object]]]] = [
        ("run", [("mode", cfg.mode), ("seed", cfg.seed)]),
        ("grid", [("n", cfg.grid.n), ("box_len", float(cfg.grid.box_len)),
                  ("dealias_fraction", float(cfg.grid.dealias_fraction))]),
    ]
    model = [("nu", m.nu), ("ell0", m.ell0), ("theta", m.theta)]
    if cfg.mode != "damped-default":
        model += [("alpha", m.alpha), ("kappa", m.kappa)]
    model += [("delta", m.delta), ("dt", m.dt), ("t_end", m.t_end), ("cfl_limit", m.cfl_limit)]
    sections.append(("model", model))
    sections.append(("force", [
        ("ell", fs.ell), ("amplitude", fs.amplitude), ("bump_sharpness", pr.bump_sharpness),
        ("orientation", pr.orientation), ("carrier", pr.carrier), ("gain", pr.gain),
    ]))
    ini = cfg.initial
    initial: list[tuple[str, object]] = [("kind", ini.kind)]
    if ini.kind == "random":
        initial += [("energy", ini.energy), ("k_lo", ini.k_lo)]
        if math.isfinite(ini.k_hi):
            initial.append(("k_hi", ini.k_hi))
    sections.append(("initial", initial))
    sections.append(("averaging", [
        ("burn_in", cfg.averaging.burn_in), ("window", cfg.averaging.window), ("stride", cfg.averaging.stride),
        ("c_max", cfg.c_max), ("band_max", cfg.band_max),
    ]))
    if cfg.sweep:
        sections.append(("sweep", [("ells", tuple(cfg.sweep)), ("workers", cfg.sweep_workers)]))
    sections.append(("io", [("snapshot_every", cfg.io.snapshot_every), ("checkpoint_every", cfg.io.checkpoint_every)]))
    lines = []
    for name, items in sections:
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {_fmt(v)}" for k, v in items)
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# parsing


class _Reader:
    def __init__(self, cp: configparser.ConfigParser):
        self.cp = cp
        self.explicit: set[str] = set()

    def has(self, sec: str, key: str) -> bool:
        return self.cp.has_option(sec, key)

    def raw(self, sec: str, key: str) -> str | None:
        if not self.has(sec, key):
            return None
        self.explicit.add(f"{sec}.{key}")
        return self.cp.get(sec, key).strip()

    def num(self, sec: str, key: str, default=None, kind=float):
        s = self.raw(sec, key)
        if s is None:
            if default is None:
                raise ConfigError(f"{sec}.{key}", "required value is missing")
            return default
        try:
            v = kind(s) if kind is not int else int(s)
        except ValueError:
            raise ConfigError(f"{sec}.{key}", f"expected {kind.__name__}, got {s!r}") from None
        if kind is float and not math.isfinite(v):
            raise ConfigError(f"{sec}.{key}", "value must be finite")
        return v

    def vec(self, sec: str, key: str, default: tuple, length: int | None = 3) -> tuple[float, ...]:
        s = self.raw(sec, key)
        if s is None:
            return default
        try:
            vals = tuple(float(x) for x in s.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"{sec}.{key}", f"expected numbers, got {s!r}") from None
        if length is not None and len(vals) != length:
            raise ConfigError(f"{sec}.{key}", f"expected {length} numbers, got {len(vals)}")
        return vals

    def word(self, sec: str, key: str, default: str) -> str:
        s = self.raw(sec, key)
        return default if s is None else s


def _check_tiling(grid: GridSpec, force: ForceSpec, where: str) -> None:
    if not force.tiles(grid.box_len):
        raise ConfigError(
            where,
            f"ell = {force.ell:g} and theta*ell0 = {force.spacing:g} must both divide box_len/2 = {grid.box_len / 2:g}",
        )
    if 2 * force.ell + force.spacing > grid.box_len * (1 + 1e-12):
        raise ConfigError(where, f"2*ell + theta*ell0 = {2 * force.ell + force.spacing:g} exceeds box_len")


def parse(text: str, base: str | None = None) -> ExperimentConfig:
    """Parse config text, optionally layered over ``base`` text (e.g. a preset)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=None)
    cp.optionxform = str  # keys are case-sensitive
    try:
        if base is not None:
            cp.read_string(base, source="<preset>")
        cp.read_string(text, source="<config>")
    except configparser.Error as exc:
        raise ConfigError("syntax", str(exc).splitlines()[0]) from None
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(sec, "unknown section")
        for key in cp.options(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{sec}.{key}", "unknown key")
    r = _Reader(cp)
    return _build(r)


def _build(r: _Reader) -> ExperimentConfig:
    mode = r.word("run", "mode", "damped-default")
    if mode not in MODES:
        raise ConfigError("run.mode", f"must be one of {', '.join(MODES)}")
    seed = r.num("run", "seed", 0, int)

    try:
        grid = GridSpec(
            r.num("grid", "n", kind=int),
            r.num("grid", "box_len"),
            r.num("grid", "dealias_fraction", 2.0 / 3.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from None

    nu = r.num("model", "nu")
    ell0 = r.num("model", "ell0")
    theta = r.num("model", "theta", 1.0)
    delta = r.num("model", "delta", 0.0)
    has_alpha, has_kappa = r.has("model", "alpha"), r.has("model", "kappa")
    alpha_pd = nu / ell0**2
    kappa_pd = 1.0 / (20 * theta * ell0)
    if mode == "damped-default":
        for key, present in (("alpha", has_alpha), ("kappa", has_kappa)):
            if present:
                raise ConfigError(f"model.{key}", "damped-default mode fixes alpha and kappa; use damped-custom to override")
        alpha, kappa = alpha_pd, kappa_pd
    elif mode == "damped-custom":
        alpha = r.num("model", "alpha")
        kappa = r.num("model", "kappa")
    elif mode == "classical":
        alpha = r.num("model", "alpha", 0.0)
        if alpha != 0.0:
            raise ConfigError("model.alpha", "classical mode requires alpha = 0")
        kappa = r.num("model", "kappa", 0.0)
    else:  # mollified
        alpha = r.num("model", "alpha", alpha_pd)
        kappa = r.num("model", "kappa", kappa_pd)
    if mode == "mollified" and not delta > 0:
        raise ConfigError("model.delta", "mollified mode needs delta > 0")
    if mode != "mollified" and delta != 0.0:
        raise ConfigError("model.delta", "delta > 0 is only allowed in mollified mode")
    try:
        model = ModelParams(
            nu=nu, ell0=ell0, alpha=alpha, kappa=kappa,
            dt=r.num("model", "dt"), t_end=r.num("model", "t_end"),
            theta=theta, delta=delta, cfl_limit=r.num("model", "cfl_limit", 0.5),
        )
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None

    try:
        profile = ProfileSpec(
            theta=theta,
            bump_sharpness=r.num("force", "bump_sharpness", 1.0),
            orientation=r.vec("force", "orientation", (0.0, 0.0, 1.0)),
            seed=seed,
            carrier=r.vec("force", "carrier", (0.4, 0.0, 0.0)),
            gain=r.num("force", "gain", 0.1),
        )
        force = ForceSpec(
            profile, ell0, r.num("force", "ell"), r.num("force", "amplitude", nu**2 / ell0**3), nu
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("force", str(exc)) from None
    _check_tiling(grid, force, "force.ell")

    kind = r.word("initial", "kind", "zero")
    if kind not in ("zero", "random"):
        raise ConfigError("initial.kind", "must be zero or random")
    if kind == "random":
        initial = InitialSpec(
            kind, r.num("initial", "energy"), r.num("initial", "k_lo", 0.0), r.num("initial", "k_hi", math.inf)
        )
        if not initial.energy > 0:
            raise ConfigError("initial.energy", "must be positive")
    else:
        for key in ("energy", "k_lo", "k_hi"):
            if r.has("initial", key):
                raise ConfigError(f"initial.{key}", "only meaningful for kind = random")
        initial = InitialSpec()

    beta_ref = model.beta if model.beta > 0 else min(2 * alpha_pd, nu * kappa_pd**2)
    burn_in = r.num("averaging", "burn_in", 5.0 / beta_ref)
    window = r.num("averaging", "window", 1.0 / beta_ref)
    if burn_in < 5.0 / beta_ref * (1 - 1e-12):
        raise ConfigError("averaging.burn_in", f"must be at least 5/beta = {5.0 / beta_ref:g}")
    try:
        averaging = AveragingPolicy(burn_in, window, r.num("averaging", "stride", 1, int))
    except ValueError as exc:
        raise ConfigError("averaging", str(exc)) from None
    c_max = r.num("averaging", "c_max", 10.0)
    band_max = r.num("averaging", "band_max", 5.0)

    sweep: tuple[float, ...] = ()
    if r.has("sweep", "ells"):
        sweep = r.vec("sweep", "ells", (), length=None)
        for ell in sweep:
            _check_tiling(grid, replace(force, ell=ell), "sweep.ells")
    workers = r.num("sweep", "workers", 1, int)
    if workers < 1:
        raise ConfigError("sweep.workers", "must be >= 1")

    io = IoSpec(r.num("io", "snapshot_every", 0, int), r.num("io", "checkpoint_every", 0, int))
    if io.snapshot_every < 0 or io.checkpoint_every < 0:
        raise ConfigError("io", "cadences must be >= 0")

    return ExperimentConfig(
        mode=mode, seed=seed, grid=grid, model=model, profile=profile, force=force,
        averaging=averaging, initial=initial, io=io, sweep=sweep, sweep_workers=workers,
        c_max=c_max, band_max=band_max, _explicit=frozenset(r.explicit),
    )


# ---------------------------------------------------------------------------
# presets

PRESETS: dict[str, str] = {
    # 48^3 desk-scale default: box 32 theta*ell0, horizon 20/beta
    "desk": """
[run]
mode = damped-default
seed = 0
[grid]
n = 48
box_len = 32.0
[model]
nu = 1.0
ell0 = 1.0
theta = 1.0
dt = 0.8
t_end = 8000.0
[force]
ell = 4.0
[io]
checkpoint_every = 1000
""",
    # ell sweep at 48^3 in a box wide enough for the lattice to reach its interior plateau
    "sweep": """
[run]
mode = damped-default
seed = 0
[grid]
n = 48
box_len = 96.0
[model]
nu = 1.0
ell0 = 1.0
theta = 1.0
dt = 1.0
t_end = 2300.0
[force]
ell = 3.0
[averaging]
burn_in = 2000.0
window = 100.0
[sweep]
ells = 3 6 12 24
""",
    # seconds-scale configuration for tests: damping made active by a larger kappa
    "smoke": """
[run]
mode = damped-custom
seed = 0
[grid]
n = 16
box_len = 16.0
[model]
nu = 1.0
ell0 = 1.0
theta = 1.0
alpha = 1.0
kappa = 0.5
dt = 0.5
t_end = 60.0
[force]
ell = 2.0
[averaging]
burn_in = 20.0
window = 10.0
[io]
checkpoint_every = 20
snapshot_every = 40
""",
}


def preset(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
