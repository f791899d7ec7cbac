"""Binary dataset container for generated channel realizations.

Layout: 4 magic bytes ``JEFP``, a little-endian u16 format version, a
little-endian u32 metadata length followed by that many bytes of UTF-8
JSON, then the raw samples. Each sample stores the downlink block followed
by the uplink block; each block is [user][subcarrier][antenna] with
interleaved real/imag little-endian float32 values.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .channel import ChannelRealization

MAGIC = b"JEFP"
FORMAT_VERSION = 1


class DatasetError(ValueError):
    """Base class for dataset container failures."""


class DatasetFormatError(DatasetError):
    """The file is not a dataset container at all."""


class DatasetVersionError(DatasetError):
    """The container declares a format version this code cannot read."""


class DatasetTruncatedError(DatasetError):
    """The file ends before the declared content is complete."""


class DatasetShapeError(DatasetError):
    """Tensor shapes or sizes disagree with the declared metadata."""


@dataclass
class DatasetMeta:
    """Metadata block stored inside the container."""

    scenario: str
    n_subcarriers: int
    n_tx_antennas: int
    k_max: int
    n_samples: int
    base_seed: int
    seeds: list[int] = field(default_factory=list)

    def sample_shape(self) -> tuple[int, int, int]:
        return (self.k_max, self.n_subcarriers, self.n_tx_antennas)


def write_dataset(path, realizations: list[ChannelRealization], meta: DatasetMeta) -> None:
    """Write realizations to ``path``; complex tensors round-trip losslessly."""
    realizations = list(realizations)
    if meta.n_samples != len(realizations):
        raise DatasetShapeError(
            f"metadata declares {meta.n_samples} samples, got {len(realizations)}")
    shape = meta.sample_shape()
    for r in realizations:
        if r.h_down.shape != shape or r.h_up.shape != shape:
            raise DatasetShapeError(
                f"realization shape {r.h_down.shape} does not match metadata {shape}")
    meta.seeds = [r.seed for r in realizations]
    meta_bytes = json.dumps(asdict(meta)).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HI", FORMAT_VERSION, len(meta_bytes)))
        f.write(meta_bytes)
        for r in realizations:
            f.write(np.ascontiguousarray(r.h_down, dtype="<c8").tobytes())
            f.write(np.ascontiguousarray(r.h_up, dtype="<c8").tobytes())


def read_dataset(path) -> tuple[list[ChannelRealization], DatasetMeta]:
    """Read a dataset container back into realizations plus metadata."""
    blob = Path(path).read_bytes()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise DatasetFormatError(f"{path}: not a dataset file (bad magic bytes)")
    if len(blob) < 10:
        raise DatasetTruncatedError(f"{path}: truncated header")
    version = int(np.frombuffer(blob[4:6], dtype="<u2")[0])
    if version != FORMAT_VERSION:
        raise DatasetVersionError(f"{path}: unsupported version {version}")
    meta_len = int(np.frombuffer(blob[6:10], dtype="<u4")[0])
    if len(blob) < 10 + meta_len:
        raise DatasetTruncatedError(f"{path}: truncated metadata block")
    try:
        meta = DatasetMeta(**json.loads(blob[10:10 + meta_len].decode("utf-8")))
    except (ValueError, TypeError) as exc:
        raise DatasetTruncatedError(f"{path}: unreadable metadata block") from exc
    per_block = meta.k_max * meta.n_subcarriers * meta.n_tx_antennas
    sample_bytes = 2 * per_block * 8  # downlink + uplink blocks of complex64
    payload = blob[10 + meta_len:]
    expected = meta.n_samples * sample_bytes
    if len(payload) < expected:
        raise DatasetTruncatedError(
            f"{path}: expected {expected} payload bytes, found {len(payload)}")
    if len(payload) > expected:
        raise DatasetShapeError(
            f"{path}: {len(payload)} payload bytes do not match declared shapes")
    seeds = meta.seeds if meta.seeds else [meta.base_seed] * meta.n_samples
    if len(seeds) != meta.n_samples:
        raise DatasetShapeError(f"{path}: seed list length does not match sample count")
    shape = meta.sample_shape()
    out = []
    for i in range(meta.n_samples):
        raw = np.frombuffer(payload, dtype="<c8", count=2 * per_block,
                            offset=i * sample_bytes)
        out.append(ChannelRealization(
            h_down=raw[:per_block].reshape(shape).copy(),
            h_up=raw[per_block:].reshape(shape).copy(),
            seed=int(seeds[i]),
            scenario=meta.scenario,
        ))
    return out, meta


def stack_realizations(realizations: list[ChannelRealization]) -> tuple[np.ndarray, np.ndarray]:
    """Stack realizations into [n, k_max, n_subcarriers, n_tx] arrays."""
    h_down = np.stack([r.h_down for r in realizations])
    h_up = np.stack([r.h_up for r in realizations])
    return h_down, h_up
