"""Parameter checkpoints.

Versioned binary format with a JSON shape manifest, written byte-
deterministically (no timestamps): a magic line, one manifest line, then the
raw little-endian float64 tensor buffers in manifest order. Loading validates
every shape against the stored config.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from .config import TrainConfig
from .network import ModelParameters

_MAGIC = b"ACTIM-CKPT v1\n"


def save_checkpoint(path: str | Path, params: ModelParameters, config: TrainConfig) -> None:
    manifest = {
        "config": config.to_dict(),
        "tensors": [
            {"name": name, "shape": list(params.tensors[name].shape)}
            for name in params.names()
        ],
    }
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(json.dumps(manifest, sort_keys=True).encode("utf-8") + b"\n")
        for name in params.names():
            fh.write(np.ascontiguousarray(params.tensors[name], dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[ModelParameters, TrainConfig]:
    data = Path(path).read_bytes()
    if not data.startswith(_MAGIC):
        raise CheckpointError(f"{path}: not an ACTIM-CKPT v1 file")
    body = data[len(_MAGIC) :]
    nl = body.find(b"\n")
    if nl < 0:
        raise CheckpointError(f"{path}: missing manifest")
    try:
        manifest = json.loads(body[:nl].decode("utf-8"))
    except json.JSONDecodeError as err:
        raise CheckpointError(f"{path}: malformed manifest: {err}") from None
    config = TrainConfig.from_dict(manifest["config"])
    tensors = {}
    offset = nl + 1
    for spec in manifest["tensors"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(body):
            raise CheckpointError(f"{path}: truncated tensor data for {spec['name']}")
        buf = body[offset : offset + nbytes]
        tensors[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(body):
        raise CheckpointError(f"{path}: trailing bytes after tensor data")
    params = ModelParameters(tensors)
    params.validate_against(config)
    return params, config
