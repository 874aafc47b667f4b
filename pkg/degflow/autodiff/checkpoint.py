"""
Flat binary checkpoint container.

Layout (all integers little-endian u32)::

    b"DGFW" | version | tensor count
    per tensor: name length | UTF-8 name | rank | dims... | float32 LE data

Tensors are written in the order given, so a stable ``state_dict`` order gives
byte-identical files.
"""

import hashlib
import os
import struct
from collections import OrderedDict
from typing import Mapping

import numpy as np

from degflow.exceptions import CheckpointError

MAGIC = b"DGFW"
FORMAT_VERSION = 1
_U32 = struct.Struct("<I")


def save_checkpoint(path: str, tensors: Mapping[str, np.ndarray]) -> None:
    chunks = [MAGIC, _U32.pack(FORMAT_VERSION), _U32.pack(len(tensors))]
    for name, array in tensors.items():
        encoded = name.encode("utf-8")
        array = np.asarray(array)
        chunks.append(_U32.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_U32.pack(array.ndim))
        chunks.extend(_U32.pack(d) for d in array.shape)
        chunks.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as fp:
        fp.write(b"".join(chunks))


def load_checkpoint(path: str) -> "OrderedDict[str, np.ndarray]":
    try:
        with open(path, "rb") as fp:
            blob = fp.read()
    except (IOError, OSError) as e:
        raise CheckpointError(f"Failed to open checkpoint at {path}: {e}") from e
    if blob[:4] != MAGIC:
        raise CheckpointError(f"{path} is not a DGFW checkpoint")
    offset = 4

    def read_u32() -> int:
        nonlocal offset
        if offset + 4 > len(blob):
            raise CheckpointError(f"{path} is truncated")
        (value,) = _U32.unpack_from(blob, offset)
        offset += 4
        return value

    version = read_u32()
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path} has unsupported version {version}")
    tensors: OrderedDict[str, np.ndarray] = OrderedDict()
    for _ in range(read_u32()):
        name_length = read_u32()
        name = blob[offset : offset + name_length].decode("utf-8")
        offset += name_length
        shape = tuple(read_u32() for _ in range(read_u32()))
        nbytes = 4 * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(blob):
            raise CheckpointError(f"{path} is truncated in tensor {name!r}")
        data = np.frombuffer(blob, dtype="<f4", count=nbytes // 4, offset=offset)
        tensors[name] = data.reshape(shape).astype(np.float32)
        offset += nbytes
    return tensors


def checkpoint_id(path: str) -> str:
    """First 16 hex digits of the file's SHA-256 digest."""
    with open(path, "rb") as fp:
        return hashlib.sha256(fp.read()).hexdigest()[:16]


def with_prefix(tensors: Mapping[str, np.ndarray], prefix: str) -> dict:
    return {k[len(prefix) :]: v for k, v in tensors.items() if k.startswith(prefix)}
