"""On-disk formats: SPDT tensors, binary PGM images, checkpoint directories.

SPDT layout: magic ``SPDT``, u32 little-endian version (1), u32 rank,
rank x u32 extents, then row-major float32 little-endian payload.
"""

from __future__ import annotations

import json
import re
import struct
from pathlib import Path

import numpy as np

from .exceptions import ShapeError
from .nn.params import ParamStore

SPDT_MAGIC = b"SPDT"
SPDT_VERSION = 1


def write_spdt(path, array) -> None:
    arr = np.asarray(array)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    header = SPDT_MAGIC + struct.pack("<II", SPDT_VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_spdt(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != SPDT_MAGIC:
        raise ShapeError(f"{path}: bad magic {raw[:4]!r}")
    version, rank = struct.unpack_from("<II", raw, 4)
    if version != SPDT_VERSION:
        raise ShapeError(f"{path}: unsupported SPDT version {version}")
    dims = struct.unpack_from(f"<{rank}I", raw, 12)
    offset = 12 + 4 * rank
    count = int(np.prod(dims)) if rank else 0
    data = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
    if data.size != count:
        raise ShapeError(f"{path}: truncated payload")
    return data.reshape(dims).astype(np.float32)


def write_pgm(path, image) -> None:
    """8-bit binary PGM (P5) from a float image in [0,1]."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ShapeError(f"PGM wants a 2-D image, got {img.shape}")
    q = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    h, w = q.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + q.tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if not m:
        raise ShapeError(f"{path}: not a binary PGM")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ShapeError(f"{path}: only 8-bit PGM supported")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=h * w, offset=m.end())
    return pixels.reshape(h, w).astype(np.float64) / 255.0


# ---------------------------------------------------------------------------
# checkpoints: one SPDT per parameter plus a manifest


def _param_filename(index: int, name: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9_.-]", "_", name)
    return f"{index:03d}_{safe}.spdt"


def save_checkpoint(directory, store: ParamStore, meta: dict | None = None) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = {}
    for i, name in enumerate(store.names()):
        fname = _param_filename(i, name)
        write_spdt(d / fname, store.params[name])
        files[name] = fname
    manifest = {
        "format": "spider-checkpoint",
        "version": 1,
        "step": store.step,
        "params": files,
        "meta": meta or {},
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def load_checkpoint(directory) -> tuple[ParamStore, dict]:
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    if manifest.get("format") != "spider-checkpoint":
        raise ShapeError(f"{directory}: not a checkpoint directory")
    store = ParamStore()
    for name, fname in manifest["params"].items():
        store.add(name, read_spdt(d / fname).astype(np.float64))
    store.step = int(manifest.get("step", 0))
    return store, manifest.get("meta", {})
