"""Binary checkpoint and snapshot files.

Layout (all integers little-endian)::

    magic        8 bytes   b"KMDCKPT1" (checkpoint) or b"KMDSNAP1" (snapshot)
    version      uint32    FORMAT_VERSION
    header_len   uint32    byte length of the JSON header
    header       UTF-8 JSON, keys sorted: grid, params, t, step_index, shape, dtype, order
    payload      complex128 little-endian, C order, shape (3, n, n, n//2 + 1)
    digest       32 bytes  SHA-256 of every preceding byte (magic through payload)

Mode order of the payload: component, then x index, y index (both in
``numpy.fft.fftfreq`` order) and z index 0..n/2 (the real-FFT half
spectrum).  Coefficients are Fourier-series coefficients, rfftn(u) / n^3.
Floats in the header are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .dynamics import ModelParams, SimState
from .spectral_core import GridSpec, SpectralField

FORMAT_VERSION = 1
MAGIC_CHECKPOINT = b"KMDCKPT1"
MAGIC_SNAPSHOT = b"KMDSNAP1"
MODE_ORDER = "C order over (component, x, y, z); x and y in fftfreq order; z = 0..n/2 (rfft half spectrum)"


class CheckpointError(ValueError):
    pass


def grid_to_dict(grid: GridSpec) -> dict:
    return {"n": int(grid.n), "box_len": float(grid.box_len), "dealias_fraction": float(grid.dealias_fraction)}


def grid_from_dict(d: dict) -> GridSpec:
    return GridSpec(int(d["n"]), float(d["box_len"]), float(d["dealias_fraction"]))


def params_to_dict(p: ModelParams) -> dict:
    return {k: float(v) for k, v in asdict(p).items()}


def params_from_dict(d: dict) -> ModelParams:
    return ModelParams(**{k: float(v) for k, v in d.items()})


def encode(state: SimState, params: ModelParams | None, magic: bytes = MAGIC_CHECKPOINT) -> bytes:
    grid = state.u.grid
    header = {
        "grid": grid_to_dict(grid),
        "params": params_to_dict(params) if params is not None else None,
        "t": float(state.t),
        "step_index": int(state.step_index),
        "shape": list(grid.shape),
        "dtype": "<c16",
        "order": MODE_ORDER,
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(state.u.coeffs, dtype="<c16").tobytes()
    body = b"".join([magic, struct.pack("<II", FORMAT_VERSION, len(hbytes)), hbytes, payload])
    return body + hashlib.sha256(body).digest()


def decode(blob: bytes, magic: bytes | None = None) -> tuple[SimState, dict]:
    if len(blob) < 16:
        raise CheckpointError("file too short")
    got = blob[:8]
    if got not in (MAGIC_CHECKPOINT, MAGIC_SNAPSHOT) or (magic is not None and got != magic):
        raise CheckpointError(f"bad magic {got!r}")
    version, hlen = struct.unpack("<II", blob[8:16])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported format version {version}")
    try:
        header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
        grid = grid_from_dict(header["grid"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt header: {exc}") from None
    nbytes = int(np.prod(grid.shape)) * 16
    start = 16 + hlen
    payload = blob[start : start + nbytes]
    digest = blob[start + nbytes : start + nbytes + 32]
    if len(payload) != nbytes or len(digest) != 32:
        raise CheckpointError("truncated payload")
    if hashlib.sha256(blob[: start + nbytes]).digest() != digest:
        raise CheckpointError("digest mismatch")
    coeffs = np.frombuffer(payload, dtype="<c16").reshape(grid.shape).astype(np.complex128)
    state = SimState(float(header["t"]), SpectralField(grid, coeffs), int(header["step_index"]))
    return state, header


def write_checkpoint(path: Path | str, state: SimState, params: ModelParams | None) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode(state, params, MAGIC_CHECKPOINT))
    tmp.replace(path)


def write_snapshot(path: Path | str, state: SimState) -> None:
    Path(path).write_bytes(encode(state, None, MAGIC_SNAPSHOT))


def read_checkpoint(path: Path | str) -> tuple[SimState, dict]:
    return decode(Path(path).read_bytes())
