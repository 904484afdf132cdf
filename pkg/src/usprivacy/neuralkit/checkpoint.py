"""Binary checkpoint container shared by networks and shallow models.

Layout (all integers little-endian):

    bytes 0-7    magic (8 bytes, identifies the payload family)
    bytes 8-11   container version, uint32
    bytes 12-15  header length H, uint32
    bytes 16-    header JSON (utf-8, canonical key order):
                 {"meta": caller dict, "blocks": [[shape], ...]}
    ...          raw float64 blocks, C-order, concatenated in header order
    last 4       crc32 of every preceding byte, uint32

The crc makes truncation and bit corruption detectable before any block
is interpreted.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError
from ..util import canonical_json

CONTAINER_VERSION = 1

MAGIC_NETWORK = b"USPNET01"
MAGIC_MODEL = b"USPMDL01"


def write_container(path, magic: bytes, meta: dict, blocks) -> None:
    if len(magic) != 8:
        raise ConfigError("container magic must be exactly 8 bytes")
    blocks = [np.ascontiguousarray(b, dtype=np.float64) for b in blocks]
    header = canonical_json(
        {"meta": meta, "blocks": [list(b.shape) for b in blocks]}
    ).encode("utf-8")
    blob = bytearray()
    blob += magic
    blob += struct.pack("<II", CONTAINER_VERSION, len(header))
    blob += header
    for block in blocks:
        blob += block.tobytes("C")
    blob += struct.pack("<I", zlib.crc32(bytes(blob)))
    Path(path).write_bytes(bytes(blob))


def read_container(path, magic: bytes) -> tuple[dict, list[np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"checkpoint file not found: {path}")
    blob = path.read_bytes()
    if len(blob) < 20:
        raise DataError(f"{path}: file too short to be a checkpoint")
    if blob[:8] != magic:
        raise DataError(
            f"{path}: bad magic {blob[:8]!r}; expected {magic.decode()} payload"
        )
    (stored_crc,) = struct.unpack_from("<I", blob, len(blob) - 4)
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise DataError(f"{path}: checksum mismatch (truncated or corrupted file)")
    version, header_len = struct.unpack_from("<II", blob, 8)
    if version != CONTAINER_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    try:
        header = json.loads(blob[16:16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise DataError(f"{path}: unreadable checkpoint header")
    offset = 16 + header_len
    blocks = []
    for shape in header.get("blocks", []):
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(blob) - 4:
            raise DataError(f"{path}: checkpoint blocks exceed file size")
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        blocks.append(arr.reshape(shape).astype(np.float64))
        offset = end
    if offset != len(blob) - 4:
        raise DataError(f"{path}: trailing bytes after checkpoint blocks")
    return header.get("meta", {}), blocks
