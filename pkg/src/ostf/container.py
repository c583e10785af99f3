"""Bit-exact on-disk ensemble container (OSTF format).

Layout:

    bytes 0..5    magic  b"OSTF1\\n"
    bytes 6..13   meta_len, unsigned 64-bit little-endian
    meta          UTF-8 JSON: {version, dim, n, extent, members, snapshots,
                  times[], has_pressure, weights[], seed?, generator?, alpha?}
    payload       velocity array then optional pressure array, float64
                  little-endian, row-major, member-major then snapshot then
                  component then grid index

The declared shapes must exactly partition the payload; reads are validated
eagerly for structure and byte counts, while measure-level axioms are left
to the analysis passes.
"""

from __future__ import annotations

import json

import numpy as np

from .ensemble import Ensemble, make_ensemble
from .errors import (CorruptContainerError, InvalidTimesError,
                     NotAContainerError, ShapeMismatchError,
                     VersionMismatchError)
from .fields import GridField
from .grid import make_grid

MAGIC = b"OSTF1\n"
FORMAT_VERSION = 1


def _meta_for(ensemble: Ensemble, extra: dict | None) -> dict:
    grid = ensemble.grid
    meta = {
        "version": FORMAT_VERSION,
        "dim": grid.dim,
        "n": grid.n,
        "extent": grid.extent,
        "members": ensemble.size,
        "snapshots": int(ensemble.times.size),
        "times": [float(t) for t in ensemble.times],
        "has_pressure": ensemble.has_pressure,
        "weights": [float(w) for w in ensemble.weights],
    }
    if extra:
        meta.update(extra)
    return meta


def write_container(ensemble: Ensemble, path, extra_meta: dict | None = None) -> None:
    """Serialize the ensemble; read-back equality is bit-exact."""
    meta = _meta_for(ensemble, extra_meta)
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(np.uint64(len(blob)).astype("<u8").tobytes())
            fh.write(blob)
            for member in ensemble.members:
                fh.write(np.ascontiguousarray(member.velocity, dtype="<f8").tobytes())
            if ensemble.has_pressure:
                for member in ensemble.members:
                    fh.write(np.ascontiguousarray(member.pressure, dtype="<f8").tobytes())
    except OSError as exc:
        raise OSError(f"failed writing container {path}: {exc}") from exc


def read_container(path) -> Ensemble:
    """Read and structurally validate a container written by write_container."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise OSError(f"failed reading container {path}: {exc}") from exc

    if len(raw) < len(MAGIC) or raw[: len(MAGIC)] != MAGIC:
        raise NotAContainerError(f"{path}: bad magic")
    off = len(MAGIC)
    if len(raw) < off + 8:
        raise CorruptContainerError(f"{path}: truncated meta length", off)
    meta_len = int(np.frombuffer(raw, dtype="<u8", count=1, offset=off)[0])
    off += 8
    if len(raw) < off + meta_len:
        raise CorruptContainerError(f"{path}: truncated meta block", off)
    try:
        meta = json.loads(raw[off: off + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptContainerError(f"{path}: unreadable meta ({exc})", off) from exc
    off += meta_len

    if meta.get("version") != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: format version {meta.get('version')} != {FORMAT_VERSION}")
    for key in ("dim", "n", "members", "snapshots", "times", "has_pressure",
                "weights"):
        if key not in meta:
            raise ShapeMismatchError(f"{path}: meta lacks key {key!r}")

    dim, n = int(meta["dim"]), int(meta["n"])
    members, snapshots = int(meta["members"]), int(meta["snapshots"])
    times = np.asarray(meta["times"], dtype=float)
    if times.size != snapshots or (times.size > 1 and np.any(np.diff(times) <= 0)):
        raise InvalidTimesError(f"{path}: times are not strictly increasing")
    weights = np.asarray(meta["weights"], dtype=float)
    if weights.size != members:
        raise ShapeMismatchError(f"{path}: weights length != members")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ShapeMismatchError(f"{path}: weights do not sum to 1")

    grid = make_grid(dim, n)
    per_member_v = snapshots * dim * n**dim
    per_member_p = snapshots * n**dim
    expected = members * per_member_v * 8
    if meta["has_pressure"]:
        expected += members * per_member_p * 8
    if len(raw) - off != expected:
        raise CorruptContainerError(
            f"{path}: payload holds {len(raw) - off} bytes, expected {expected}",
            off)

    fields = []
    vel_shape = (snapshots, dim) + (n,) * dim
    p_shape = (snapshots,) + (n,) * dim
    vel_blocks = []
    for _ in range(members):
        arr = np.frombuffer(raw, dtype="<f8", count=per_member_v, offset=off)
        vel_blocks.append(arr.reshape(vel_shape).astype(float))
        off += per_member_v * 8
    p_blocks = [None] * members
    if meta["has_pressure"]:
        for m in range(members):
            arr = np.frombuffer(raw, dtype="<f8", count=per_member_p, offset=off)
            p_blocks[m] = arr.reshape(p_shape).astype(float)
            off += per_member_p * 8
    for m in range(members):
        fields.append(GridField(grid=grid, times=times,
                                velocity=vel_blocks[m], pressure=p_blocks[m]))
    return make_ensemble(fields, weights)


def read_meta(path) -> dict:
    """Header JSON only (no payload validation)."""
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC) + 8)
        if head[: len(MAGIC)] != MAGIC:
            raise NotAContainerError(f"{path}: bad magic")
        meta_len = int(np.frombuffer(head, dtype="<u8", count=1,
                                     offset=len(MAGIC))[0])
        blob = fh.read(meta_len)
        if len(blob) != meta_len:
            raise CorruptContainerError(f"{path}: truncated meta block",
                                        len(MAGIC) + 8)
    return json.loads(blob.decode("utf-8"))
