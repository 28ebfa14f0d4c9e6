"""Versioned binary network checkpoints.

Layout:
  bytes 0..4    magic "RFPN"
  u32           format version (little-endian)
  u32           header length in bytes
  header        JSON: layer specs, input shape, float width, seed,
                and the shape of every state array in declaration order
  payload       raw little-endian state buffers (parameters then batch-norm
                buffers, per layer, in declaration order)

Loading rebuilds the Network from the header and restores state, so eval-mode
forward passes reproduce the saved model bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import CheckpointError, ConfigError
from .nn.layers import LayerSpec
from .nn.network import Network

MAGIC = b"RFPN"
VERSION = 1


def save_checkpoint(net: Network, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = net.state_arrays()
    header = {
        "specs": [{"kind": s.kind, "params": s.params} for s in net.specs],
        "input_shape": list(net.input_shape),
        "float_width": 64 if net.dtype == np.float64 else 32,
        "seed": net.seed,
        "array_shapes": [list(a.shape) for a in arrays],
    }
    hbytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.uint32(VERSION).tobytes())
        f.write(np.uint32(len(hbytes)).tobytes())
        f.write(hbytes)
        for a in arrays:
            f.write(np.ascontiguousarray(a, dtype=a.dtype.newbyteorder("<")).tobytes())
    return path


def load_checkpoint(path: Path) -> Network:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a network checkpoint (bad magic)")
    version = int(np.frombuffer(raw[4:8], dtype="<u4")[0])
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    hlen = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    if len(raw) < 12 + hlen:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(raw[12 : 12 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt header ({e})") from e

    specs = [LayerSpec(s["kind"], dict(s["params"])) for s in header["specs"]]
    net = Network(
        specs,
        tuple(header["input_shape"]),
        seed=header["seed"],
        float64=header["float_width"] == 64,
    )
    dtype = np.dtype("<f8") if header["float_width"] == 64 else np.dtype("<f4")
    arrays = []
    off = 12 + hlen
    for shape in header["array_shapes"]:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * dtype.itemsize
        if off + nbytes > len(raw):
            raise CheckpointError(f"{path}: truncated parameter payload")
        arrays.append(np.frombuffer(raw[off : off + nbytes], dtype=dtype).reshape(shape))
        off += nbytes
    if off != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - off} trailing bytes after payload")
    try:
        net.load_state_arrays(arrays)
    except ConfigError as e:
        raise CheckpointError(f"{path}: state does not fit the declared layers ({e})") from e
    return net
