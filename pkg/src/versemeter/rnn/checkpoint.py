"""Single-file model checkpoints: versioned header, JSON metadata, and
every parameter tensor as float64 with declared shapes."""

from __future__ import annotations

import json
import struct

import numpy as np

from .network import RecurrentStack

_MAGIC = b"VMCK"
_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, stack: RecurrentStack, extra: dict | None = None) -> None:
    meta = {"version": _VERSION, "stack": stack.config(), "extra": extra or {}}
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
    tensors = stack.named_parameters()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors:
            name_b = name.encode()
            fh.write(struct.pack("<H", len(name_b)))
            fh.write(name_b)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read(fh, size, what):
    data = fh.read(size)
    if len(data) != size:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return data


def load_checkpoint(path) -> tuple[RecurrentStack, dict]:
    """Rebuild the stack and return (stack, extra metadata)."""
    with open(path, "rb") as fh:
        if _read(fh, 4, "magic") != _MAGIC:
            raise CheckpointError("not a model checkpoint")
        version, meta_len = struct.unpack("<II", _read(fh, 8, "header"))
        if version != _VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        meta = json.loads(_read(fh, meta_len, "metadata"))
        stack = RecurrentStack(seed=0, **meta["stack"])
        params = dict(stack.named_parameters())
        (n_tensors,) = struct.unpack("<I", _read(fh, 4, "tensor count"))
        if n_tensors != len(params):
            raise CheckpointError(
                f"checkpoint has {n_tensors} tensors, model needs {len(params)}"
            )
        for _ in range(n_tensors):
            (name_len,) = struct.unpack("<H", _read(fh, 2, "tensor name"))
            name = _read(fh, name_len, "tensor name").decode()
            (ndim,) = struct.unpack("<B", _read(fh, 1, "tensor rank"))
            shape = struct.unpack(f"<{ndim}I", _read(fh, 4 * ndim, "tensor shape"))
            count = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(
                _read(fh, 8 * count, f"tensor {name}"), dtype="<f8"
            ).reshape(shape)
            if name not in params:
                raise CheckpointError(f"unexpected tensor {name!r}")
            if params[name].shape != data.shape:
                raise CheckpointError(
                    f"tensor {name!r}: shape {data.shape} != {params[name].shape}"
                )
            params[name][...] = data
    return stack, meta.get("extra", {})
