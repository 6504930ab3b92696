"""Experiment runner: run, sweep, verify and report verbs.

Run directory layout::

    config.ini            canonical configuration (its SHA-256 is the config hash)
    ledger.ndjson         one energy-ledger record per step
    ledger.csv            CSV mirror with units in the header
    force.snap            assembled force in the snapshot format
    snapshots/step_*.snap velocity snapshots at the snapshot cadence
    checkpoints/*.ckpt    restart files at the checkpoint cadence, plus final.ckpt
    report.txt            flat key = value diagnostics record
    verdicts.tsv          one row per checked inequality
    manifest.json         config hash, code version, wall times, SHA-256 of every file above

Exit status: 0 success, 1 a verdict failed, 2 invalid configuration,
3 insufficient horizon or sweep, 4 solver error, 5 corrupted run directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import shutil
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import ExperimentConfig, parse, preset, serialize
from .diagnostics import (
    SweepPoint,
    SweepResult,
    Verdict,
    accumulate,
    linear_growth_check,
    build_report,
    constants_for,
    envelope_check,
    sweep_analysis,
)
from .dynamics import EnergyLedgerRow, SimState, run
from .errors import ConfigError, DegenerateRun, InsufficientHorizon, InsufficientSweep, KolmodampError
from .forcing import ForceNumbers, force_numbers
from .spectral_core import SpectralField, energy_array, random_field, set_fft_workers
from .storage import CheckpointError, read_checkpoint, write_checkpoint, write_snapshot

log = logging.getLogger("kolmodamp")

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_INSUFFICIENT = 3
EXIT_SOLVER = 4
EXIT_CORRUPT = 5

LEDGER_UNITS = {
    "t": "T",
    "kinetic": "L^5/T^2",
    "dissipation": "L^5/T^3",
    "injection": "L^5/T^3",
    "damping": "L^5/T^3",
    "residual": "L^5/T^3",
}


# ---------------------------------------------------------------------------
# building blocks


def initial_field(cfg: ExperimentConfig) -> SpectralField:
    if cfg.initial.kind == "zero":
        return SpectralField.zeros(cfg.grid)
    rng = np.random.default_rng(cfg.seed)
    ini = cfg.initial
    return random_field(cfg.grid, rng, ini.k_lo, ini.k_hi, energy=ini.energy)


def prepare_force(cfg: ExperimentConfig) -> tuple[SpectralField, ForceNumbers]:
    return force_numbers(cfg.force, cfg.grid)


class FileSink:
    """Streams ledger rows to NDJSON and writes snapshots and checkpoints on cadence."""

    def __init__(self, out: Path, cfg: ExperimentConfig, append: bool = False):
        self.out = out
        self.cfg = cfg
        self.fh = open(out / "ledger.ndjson", "a" if append else "w", encoding="utf-8")
        (out / "checkpoints").mkdir(exist_ok=True)
        (out / "snapshots").mkdir(exist_ok=True)
        self.last_checkpoint: Path | None = None

    def on_row(self, state: SimState, row: EnergyLedgerRow) -> None:
        self.fh.write(json.dumps(row.as_dict()) + "\n")
        k = state.step_index
        io = self.cfg.io
        if io.snapshot_every and k % io.snapshot_every == 0:
            write_snapshot(self.out / "snapshots" / f"step_{k:08d}.snap", state)
        if io.checkpoint_every and k % io.checkpoint_every == 0:
            self.fh.flush()
            path = self.out / "checkpoints" / f"step_{k:08d}.ckpt"
            write_checkpoint(path, state, self.cfg.model)
            self.last_checkpoint = path

    def close(self) -> None:
        if not self.fh.closed:
            self.fh.flush()
            self.fh.close()


def read_ledger(path: Path) -> list[EnergyLedgerRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(EnergyLedgerRow(**json.loads(line)))
    return rows


def write_ledger_csv(rows: Sequence[EnergyLedgerRow], path: Path) -> None:
    header = ",".join(f"{k} [{LEDGER_UNITS[k]}]" for k in EnergyLedgerRow.FIELDS)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(",".join(repr(float(getattr(r, k))) for k in EnergyLedgerRow.FIELDS) + "\n")


def _truncate_ledger(path: Path, n_rows: int) -> None:
    if not path.exists():
        if n_rows:
            raise ConfigError("resume", "ledger.ndjson is missing in the run directory")
        return
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    complete = [ln for ln in lines if ln.endswith("\n")]
    if len(complete) < n_rows:
        raise ConfigError("resume", f"ledger holds {len(complete)} rows, checkpoint needs {n_rows}")
    path.write_text("".join(complete[:n_rows]), encoding="utf-8")


# ---------------------------------------------------------------------------
# analysis (pure: same inputs give the same report text)


@dataclass
class Analysis:
    status: str
    record: dict[str, object]
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    point: SweepPoint | None = None

    @property
    def exit_code(self) -> int:
        if self.status == "ok":
            return EXIT_OK
        if self.status == "verdict_failed":
            return EXIT_VERDICT
        if self.status in ("insufficient_horizon", "degenerate"):
            return EXIT_INSUFFICIENT
        return EXIT_SOLVER


def analyse(
    cfg: ExperimentConfig,
    rows: Sequence[EnergyLedgerRow],
    kinetic0: float,
    fn: ForceNumbers,
    solver_error: str | None = None,
) -> Analysis:
    p = cfg.model
    rec: dict[str, object] = {
        "mode": cfg.mode,
        "config_hash": cfg.digest(),
        "steps": len(rows),
        "t_final": rows[-1].t if rows else 0.0,
        "nu": p.nu,
        "ell0": p.ell0,
        "theta": p.theta,
        "alpha": p.alpha,
        "kappa": p.kappa,
        "beta": p.beta,
        "ell": fn.ell,
        "kinetic0": kinetic0,
        "force.c0": fn.c0,
        "force.gamma": fn.gamma,
        "force.L": fn.L,
        "force.F": fn.F,
        "force.G0": fn.G0,
        "force.Gr": fn.Gr,
        "force.c1": fn.c1,
        "force.c2": fn.c2,
        "force.c3": fn.c3,
        "force.c3_small": fn.c3_small,
        "force.compat": fn.compat,
        "force.l2": fn.norms.l2,
        "force.hm1": fn.norms.hm1,
        "force.linf": fn.norms.linf,
    }
    tc = constants_for(fn)
    rec.update({
        "constants.a1": tc.a1, "constants.a2": tc.a2, "constants.b1": tc.b1, "constants.b2": tc.b2,
        "constants.g0_condition": tc.g0_condition, "constants.compat": tc.compat,
    })
    if rows:
        rec["ledger.max_rel_residual"] = max(r.relative_residual() for r in rows)
    verdicts: dict[str, Verdict] = {}
    envelope = lg = None
    if p.beta > 0:
        envelope = envelope_check(rows, p, fn.norms, kinetic0, cfg.c_max)
        rec["envelope_c"] = envelope.c
        verdicts["envelope"] = Verdict(envelope.passed, envelope.c, envelope.c_max, 1.0)
    else:
        lg = linear_growth_check(rows, p.nu, fn.norms, kinetic0)
        rec["linear_growth.slope"] = lg.slope
        rec["linear_growth.bound"] = lg.bound
        rec["linear_growth.max_ratio"] = lg.max_ratio
        verdicts["linear_growth"] = Verdict(lg.passed, lg.slope, lg.bound, 1.0)

    point = None
    if solver_error is not None:
        status = "solver_error"
        rec["error"] = solver_error.replace("\n", " ")
    else:
        try:
            av = accumulate(rows, cfg.averaging, p.ell0)
            report = build_report(av, fn, p, cfg.grid.box_len, envelope, lg)
        except InsufficientHorizon as exc:
            status = "insufficient_horizon"
            rec["error"] = str(exc)
        except DegenerateRun as exc:
            status = "degenerate"
            rec["error"] = str(exc)
        else:
            verdicts.update(report.verdicts)
            rec.update({
                "epsilon": report.epsilon, "U": report.U, "Re": report.Re, "lT": report.lT,
                "kolmogorov_ratio": report.kolmogorov_ratio, "gr_re_ratio": report.gr_re_ratio,
                "fl_u2_ratio": report.fl_u2_ratio, "taylor_ratio": report.taylor_ratio,
                "k41_taylor": report.k41_taylor, "drift": report.drift, "windows": av.n_windows,
            })
            point = SweepPoint.from_report(report, fn)
            status = "ok" if all(v.passed for v in verdicts.values()) else "verdict_failed"
    for name, v in verdicts.items():
        rec[f"verdict.{name}"] = "pass" if v.passed else "fail"
        rec[f"verdict.{name}.lhs"] = v.lhs
        rec[f"verdict.{name}.rhs"] = v.rhs
    return Analysis(status, {"status": status, **rec}, verdicts, point)


def _fmt(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_report(a: Analysis) -> str:
    lines = ["# kolmodamp diagnostics report (key = value)"]
    lines += [f"{k} = {_fmt(v)}" for k, v in a.record.items()]
    return "\n".join(lines) + "\n"


def render_verdicts(verdicts: dict[str, Verdict]) -> str:
    lines = ["name\tresult\tlhs\trelation\trhs\ttolerance"]
    for name, v in verdicts.items():
        lines.append(f"{name}\t{'pass' if v.passed else 'fail'}\t{v.lhs!r}\t{v.relation}\t{v.rhs!r}\t{v.tol!r}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if not line or line.startswith("#") or " = " not in line:
            continue
        k, v = line.split(" = ", 1)
        out[k.strip()] = v.strip()
    return out


# ---------------------------------------------------------------------------
# manifest


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _inventory(out: Path, skip_dirs: Sequence[str] = ()) -> dict[str, str]:
    files = {}
    for p in sorted(out.rglob("*")):
        rel = p.relative_to(out).as_posix()
        if not p.is_file() or rel == "manifest.json" or p.suffix == ".tmp":
            continue
        if any(rel.startswith(d + "/") for d in skip_dirs):
            continue
        files[rel] = sha256_file(p)
    return files


def write_manifest(out: Path, cfg_text: str, started: float, finished: float, skip_dirs: Sequence[str] = ()) -> dict:
    manifest = {
        "config_hash": hashlib.sha256(cfg_text.encode("utf-8")).hexdigest(),
        "code_version": __version__,
        "start_wall_time": started,
        "end_wall_time": finished,
        "files": _inventory(out, skip_dirs),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def manifest_digests(out: Path) -> dict:
    """Manifest content without the wall-clock fields."""
    m = json.loads((Path(out) / "manifest.json").read_text(encoding="utf-8"))
    return {k: v for k, v in m.items() if "wall_time" not in k}


# ---------------------------------------------------------------------------
# verbs


def execute_run(cfg: ExperimentConfig, out: Path, resume: Path | None = None) -> Analysis:
    """Run one experiment into ``out`` and return its analysis."""
    started = time.time()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_text = serialize(cfg)
    f, fn = prepare_force(cfg)
    u0 = initial_field(cfg)
    kinetic0 = energy_array(u0.coeffs, u0.basis)

    start_state = None
    if resume is not None:
        try:
            start_state, header = read_checkpoint(resume)
        except (OSError, CheckpointError) as exc:
            raise ConfigError("resume", f"cannot read checkpoint: {exc}") from None
        from .storage import grid_to_dict, params_to_dict

        if header["grid"] != grid_to_dict(cfg.grid) or header["params"] != params_to_dict(cfg.model):
            raise ConfigError("resume", "checkpoint grid or parameters differ from the configuration")
        _truncate_ledger(out / "ledger.ndjson", start_state.step_index)
    else:
        for name in ("checkpoints", "snapshots"):
            shutil.rmtree(out / name, ignore_errors=True)
        for name in ("ledger.ndjson", "ledger.csv", "report.txt", "verdicts.tsv", "manifest.json"):
            (out / name).unlink(missing_ok=True)

    (out / "config.ini").write_text(cfg_text, encoding="utf-8")
    write_snapshot(out / "force.snap", SimState(0.0, f, 0))

    sink = FileSink(out, cfg, append=resume is not None)
    solver_error = None
    final = None
    try:
        final = run(u0, f, cfg.model, sink, start=start_state)
    except KolmodampError as exc:
        solver_error = f"{type(exc).__name__}: {exc}"
        log.error("solver stopped: %s (last checkpoint %s)", solver_error, sink.last_checkpoint)
    if final is not None:
        write_checkpoint(out / "checkpoints" / "final.ckpt", final, cfg.model)
    rows = read_ledger(out / "ledger.ndjson")
    write_ledger_csv(rows, out / "ledger.csv")
    analysis = analyse(cfg, rows, kinetic0, fn, solver_error)
    (out / "report.txt").write_text(render_report(analysis), encoding="utf-8")
    (out / "verdicts.tsv").write_text(render_verdicts(analysis.verdicts), encoding="utf-8")
    write_manifest(out, cfg_text, started, time.time())
    return analysis


def recompute(out: Path) -> tuple[ExperimentConfig, Analysis]:
    """Re-derive the analysis of a finished run directory from its saved files."""
    out = Path(out)
    cfg = parse((out / "config.ini").read_text(encoding="utf-8"))
    rows = read_ledger(out / "ledger.ndjson")
    _, fn = prepare_force(cfg)
    u0 = initial_field(cfg)
    kinetic0 = energy_array(u0.coeffs, u0.basis)
    stored = parse_report((out / "report.txt").read_text(encoding="utf-8")) if (out / "report.txt").exists() else {}
    err = stored.get("error") if stored.get("status") == "solver_error" else None
    return cfg, analyse(cfg, rows, kinetic0, fn, err)


def verify_dir(out: Path) -> tuple[int, list[str]]:
    """Check digests, then recompute every verdict and diff it against the stored report."""
    out = Path(out)
    msgs: list[str] = []
    code = EXIT_OK
    mpath = out / "manifest.json"
    if not mpath.exists():
        return EXIT_CORRUPT, [f"missing manifest.json in {out}"]
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    for rel, digest in sorted(manifest["files"].items()):
        p = out / rel
        if not p.exists():
            msgs.append(f"missing file: {rel}")
            code = EXIT_CORRUPT
            continue
        actual = sha256_file(p)
        if actual != digest:
            msgs.append(f"digest mismatch: {rel}")
            code = EXIT_CORRUPT
    if (out / "sweep.ini").exists():
        return code, msgs + _verify_sweep(out, manifest)
    try:
        cfg, fresh = recompute(out)
    except Exception as exc:  # any parse failure means the directory cannot be trusted
        msgs.append(f"cannot recompute diagnostics: {type(exc).__name__}: {exc}")
        return EXIT_CORRUPT, msgs
    if hashlib.sha256(serialize(cfg).encode("utf-8")).hexdigest() != manifest.get("config_hash"):
        msgs.append("config hash differs from manifest")
        code = EXIT_CORRUPT
    stored = parse_report((out / "report.txt").read_text(encoding="utf-8"))
    recomputed = parse_report(render_report(fresh))
    for key in sorted(set(stored) | set(recomputed)):
        a, b = stored.get(key), recomputed.get(key)
        if a != b:
            msgs.append(f"report mismatch: {key} stored={a} recomputed={b}")
            code = EXIT_CORRUPT
    if code == EXIT_OK and fresh.status != "ok":
        code = fresh.exit_code
        failed = [n for n, v in fresh.verdicts.items() if not v.passed]
        msgs.append(f"run status {fresh.status}" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return code, msgs


def _run_point(args: tuple[str, str, int]) -> tuple[str, str]:
    cfg_text, out, threads = args
    set_fft_workers(threads)
    cfg = parse(cfg_text)
    try:
        a = execute_run(cfg, Path(out))
        return out, a.status
    except KolmodampError as exc:
        return out, f"error: {exc}"


def point_dir(out: Path, ell: float) -> Path:
    return Path(out) / f"ell_{ell:g}"


def execute_sweep(cfg: ExperimentConfig, out: Path, threads: int = 1) -> tuple[int, SweepResult | None, list[str]]:
    if len(cfg.sweep) < 4:
        raise InsufficientSweep(f"sweep needs at least 4 ell values, got {len(cfg.sweep)}")
    started = time.time()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    sweep_text = serialize(cfg)
    (out / "sweep.ini").write_text(sweep_text, encoding="utf-8")
    jobs = [(serialize(cfg.with_ell(ell)), str(point_dir(out, ell)), threads) for ell in cfg.sweep]
    if cfg.sweep_workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.sweep_workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]
    for d, status in results:
        log.info("sweep point %s: %s", d, status)
    code, result, lines = aggregate_sweep(out)
    write_manifest(out, sweep_text, started, time.time(), skip_dirs=[point_dir(out, e).name for e in cfg.sweep])
    return code, result, lines


def aggregate_sweep(out: Path) -> tuple[int, SweepResult | None, list[str]]:
    """Recompute every point from its saved ledger and fit the sweep (no simulation)."""
    out = Path(out)
    cfg = parse((out / "sweep.ini").read_text(encoding="utf-8"))
    points: list[SweepPoint] = []
    lines = ["ell\tstatus"]
    for ell in cfg.sweep:
        d = point_dir(out, ell)
        try:
            _, a = recompute(d)
            status = a.status
            if a.point is not None:
                points.append(a.point)
        except (OSError, KolmodampError, ValueError) as exc:
            status = f"error: {exc}"
        lines.append(f"{ell:g}\t{status}")
    csv = ["ell [L],Gr [-],Re [-],U [L/T],epsilon [L^2/T^3],F [L/T^2],L [L],lT [L],"
           "Gr/Re^2 [-],FL/U^2 [-],epsL/U^3 [-],lT/ell0 [-],ell0/sqrt(Re) [L]"]
    for p in points:
        vals = [p.ell, p.Gr, p.Re, p.U, p.epsilon, p.F, p.L, p.lT, p.Gr / p.Re**2, p.F * p.L / p.U**2,
                p.epsilon * p.L / p.U**3, p.lT / p.ell0, p.ell0 / math.sqrt(p.Re)]
        csv.append(",".join(repr(float(v)) for v in vals))
    (out / "sweep_points.csv").write_text("\n".join(csv) + "\n", encoding="utf-8")
    try:
        result = sweep_analysis(points, band_max=cfg.band_max)
    except InsufficientSweep as exc:
        text = "\n".join(lines) + f"\nstatus = insufficient_sweep\nerror = {exc}\n"
        (out / "sweep_report.txt").write_text(text, encoding="utf-8")
        (out / "sweep_verdicts.tsv").write_text(render_verdicts({}), encoding="utf-8")
        return EXIT_INSUFFICIENT, None, text.splitlines()
    status = "ok" if result.passed else "verdict_failed"
    rep = ["# kolmodamp sweep report (key = value)", f"status = {status}", f"points = {len(points)}",
           f"gr_span = {result.gr_span!r}", f"k41_shrink = {result.shrink!r}"]
    rep += [f"slope.{k} = {v!r}" for k, v in result.slopes.items()]
    rep += [f"band.{k} = {v!r}" for k, v in result.bands.items()]
    rep += [f"verdict.{k} = {'pass' if v.passed else 'fail'}" for k, v in result.verdicts.items()]
    rep += [f"point.{ln.replace(chr(9), ' = ', 1)}" for ln in lines[1:]]
    (out / "sweep_report.txt").write_text("\n".join(rep) + "\n", encoding="utf-8")
    (out / "sweep_verdicts.tsv").write_text(render_verdicts(result.verdicts), encoding="utf-8")
    return (EXIT_OK if result.passed else EXIT_VERDICT), result, rep


def _verify_sweep(out: Path, manifest: dict) -> list[str]:
    msgs = []
    stored = (out / "sweep_report.txt").read_text(encoding="utf-8")
    cfg = parse((out / "sweep.ini").read_text(encoding="utf-8"))
    for ell in cfg.sweep:
        code, sub = verify_dir(point_dir(out, ell))
        msgs += [f"ell_{ell:g}: {m}" for m in sub]
    aggregate_sweep(out)
    if (out / "sweep_report.txt").read_text(encoding="utf-8") != stored:
        msgs.append("sweep report differs from recomputation")
    return msgs


# ---------------------------------------------------------------------------
# command line


def _threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        return set_fft_workers(args.threads)
    return set_fft_workers(None)


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    base = preset(args.preset) if args.preset else None
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
    elif base is not None:
        text, base = base, None
    else:
        raise ConfigError("config", "give --config PATH or --preset NAME")
    return parse(text, base=base)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kolmodamp", description="Damped Navier-Stokes desk-scale experiments")
    parser.add_argument("--version", action="version", version=f"kolmodamp {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, helptext in (
        ("run", "integrate one configuration"),
        ("sweep", "run every ell of the [sweep] list and fit the scaling laws"),
        ("verify", "check digests and recompute all verdicts of a run or sweep directory"),
        ("report", "print the diagnostics of a run or sweep directory"),
    ):
        p = sub.add_parser(verb, help=helptext)
        p.add_argument("path", nargs="?", help="run directory (verify/report)")
        p.add_argument("--config", help="configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="FFT threads (fallback: KOLMODAMP_THREADS)")
        p.add_argument("--preset", help="named base configuration")
        p.add_argument("--resume", help="checkpoint to restart from (run only)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    threads = _threads(args)
    try:
        if args.verb == "run":
            cfg = load_config(args)
            out = Path(args.out or "run_out")
            a = execute_run(cfg, out, Path(args.resume) if args.resume else None)
            print(render_verdicts(a.verdicts), end="")
            print(f"status: {a.status}")
            return a.exit_code
        if args.verb == "sweep":
            cfg = load_config(args)
            code, _, lines = execute_sweep(cfg, Path(args.out or "sweep_out"), threads)
            print("\n".join(lines))
            return code
        target = Path(args.path or args.out or ".")
        if args.verb == "verify":
            code, msgs = verify_dir(target)
            for m in msgs:
                print(m)
            print("verify: " + ("pass" if code == EXIT_OK else "FAIL"))
            return code
        # report
        if (target / "sweep.ini").exists():
            code, _, lines = aggregate_sweep(target)
            print("\n".join(lines))
            return code
        _, a = recompute(target)
        print(render_report(a), end="")
        return a.exit_code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientSweep as exc:
        print(f"insufficient sweep: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (OSError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORRUPT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
