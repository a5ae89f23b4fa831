"""On-disk formats: the 'HSM1' binary container for complex column-major
matrices, raw float64 vectors, and the JSON manifest tying an instance
directory together."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .matcore import Dims
from .probgen import ProblemInstance

MAGIC = b"HSM1"
#: magic, version (u32), dtype tag (u8), rows (u64), cols (u64) - 25 bytes
_HEADER = struct.Struct("<4sIBQQ")
_VERSION = 1
_DTYPE_COMPLEX128 = 1


class StorageError(ValueError):
    """A file is missing, truncated, or inconsistent with its manifest."""


def write_matrix(path, m) -> None:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise StorageError(f"{path}: only 2-D matrices can be written")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, _VERSION, _DTYPE_COMPLEX128, m.shape[0], m.shape[1]))
        fh.write(np.asfortranarray(m).astype("<c16", copy=False).tobytes(order="F"))


def read_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise StorageError(f"{path}: file shorter than the 25-byte header")
    magic, version, dtype, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise StorageError(f"{path}: bad magic {magic!r}")
    if version != _VERSION or dtype != _DTYPE_COMPLEX128:
        raise StorageError(f"{path}: unsupported version/dtype {version}/{dtype}")
    payload = data[_HEADER.size :]
    if len(payload) != 16 * rows * cols:
        raise StorageError(
            f"{path}: payload is {len(payload)} bytes, expected {16 * rows * cols}"
        )
    flat = np.frombuffer(payload, dtype="<c16")
    return np.asfortranarray(flat.reshape((rows, cols), order="F").astype(np.complex128))


def write_vector(path, v) -> None:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise StorageError(f"{path}: only 1-D vectors can be written")
    Path(path).write_bytes(v.astype("<f8", copy=False).tobytes())


def read_vector(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) % 8:
        raise StorageError(f"{path}: length {len(data)} is not a multiple of 8")
    return np.frombuffer(data, dtype="<f8").astype(np.float64)


_BLOCK_FIELDS = ("a", "b", "t_aa", "t_ab", "t_bb")

MANIFEST_NAME = "manifest.json"


def save_instance(p: ProblemInstance, outdir, seed: int = 0,
                  nonhpd_fraction: float = 0.0) -> dict:
    """Write per-atom block files plus the manifest; returns the manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    blocks = {
        "a": p.a_blocks,
        "b": p.b_blocks,
        "t_aa": p.t_aa,
        "t_ab": p.t_ab,
        "t_bb": p.t_bb,
    }
    files: dict[str, list[str]] = {name: [] for name in _BLOCK_FIELDS}
    files["u"] = []
    for name in _BLOCK_FIELDS:
        for a, blk in enumerate(blocks[name]):
            fname = f"{name}_{a + 1:04d}.hsm"
            write_matrix(outdir / fname, blk)
            files[name].append(fname)
    for a, u in enumerate(p.u_norms):
        fname = f"u_{a + 1:04d}.f64"
        write_vector(outdir / fname, u)
        files["u"].append(fname)
    manifest = {
        "dims": {"n_atoms": p.dims.n_atoms, "n_l": p.dims.n_l, "n_g": p.dims.n_g},
        "seed": seed,
        "nonhpd_fraction": nonhpd_fraction,
        "files": files,
    }
    (outdir / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest


def load_instance(indir) -> ProblemInstance:
    """Read an instance directory back, checking shapes against the manifest."""
    indir = Path(indir)
    mpath = indir / MANIFEST_NAME
    if not mpath.is_file():
        raise StorageError(f"{mpath}: manifest not found")
    try:
        manifest = json.loads(mpath.read_text())
        dims = Dims(**manifest["dims"])
        files = manifest["files"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise StorageError(f"{mpath}: malformed manifest ({exc})") from exc

    shapes = {
        "a": (dims.n_l, dims.n_g),
        "b": (dims.n_l, dims.n_g),
        "t_aa": (dims.n_l, dims.n_l),
        "t_ab": (dims.n_l, dims.n_l),
        "t_bb": (dims.n_l, dims.n_l),
    }
    inst = ProblemInstance(dims)
    lists = {
        "a": inst.a_blocks,
        "b": inst.b_blocks,
        "t_aa": inst.t_aa,
        "t_ab": inst.t_ab,
        "t_bb": inst.t_bb,
    }
    for name in _BLOCK_FIELDS:
        names = files.get(name, [])
        if len(names) != dims.n_atoms:
            raise StorageError(
                f"{mpath}: {len(names)} {name} files listed, expected {dims.n_atoms}"
            )
        for fname in names:
            path = indir / fname
            if not path.is_file():
                raise StorageError(f"{path}: referenced by manifest but missing")
            blk = read_matrix(path)
            if blk.shape != shapes[name]:
                raise StorageError(
                    f"{path}: shape {blk.shape} does not match manifest {shapes[name]}"
                )
            lists[name].append(blk)
    unames = files.get("u", [])
    if len(unames) != dims.n_atoms:
        raise StorageError(
            f"{mpath}: {len(unames)} u files listed, expected {dims.n_atoms}"
        )
    for fname in unames:
        path = indir / fname
        if not path.is_file():
            raise StorageError(f"{path}: referenced by manifest but missing")
        u = read_vector(path)
        if u.shape != (dims.n_l,):
            raise StorageError(
                f"{path}: length {u.shape[0]} does not match manifest {dims.n_l}"
            )
        inst.u_norms.append(u)
    return inst
