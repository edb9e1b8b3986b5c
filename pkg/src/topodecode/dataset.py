"""(syndrome, diagnosis) training sets and the .qds file format.

File layout: 4-byte magic ``QDS1``, uint32 format version, uint32 header
length, the UTF-8 JSON header, then one record per sample holding the packed
syndrome bits followed by the packed diagnosis bits (little bit order, each
padded to whole bytes). Errors are not stored; they are regenerated from
(seed, index) when needed.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2
from .codes import StabilizerCode, syndrome
from .diagnosis import DiagnosisScheme
from .errors import ContractViolation, CorruptPayload, VersionMismatch
from .noise import BLOCK, NoiseModel, sample_errors
from .parallel import map_ranges

MAGIC = b"QDS1"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


@dataclass(eq=False)
class Dataset:
    header: dict
    s: np.ndarray          # (count, n-k) uint8
    g: np.ndarray          # (count, |g|) uint8
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.s.shape[0]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Dataset) and self.header == other.header
                and np.array_equal(self.s, other.s) and np.array_equal(self.g, other.g))


def make_header(code: StabilizerCode, scheme: DiagnosisScheme, model: NoiseModel,
                count: int, seed: int) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "family": code.family,
        "d": code.d,
        "noise": model.to_dict(),
        "scheme": scheme.name,
        "scheme_id": scheme.scheme_id(),
        "count": int(count),
        "seed": int(seed),
        "syndrome_bits": int(code.num_checks),
        "diagnosis_bits": int(scheme.rows),
    }


def samples(code: StabilizerCode, scheme: DiagnosisScheme, model: NoiseModel,
            seed: int, start: int, count: int):
    """(e, s, g) for sample indices start .. start+count-1."""
    e = sample_errors(model, code.n, seed, start, count)
    return e, syndrome(code, e), gf2.symplectic_matrix(e, scheme.H_g)


def generate_dataset(code: StabilizerCode, scheme: DiagnosisScheme, model: NoiseModel,
                     count: int, seed: int, threads: int | None = None) -> Dataset:
    if scheme.code is not code and scheme.H_g.shape[1] != 2 * code.n:
        raise ContractViolation("scheme was built for a different code")
    if count < 0:
        raise ContractViolation("count must be non-negative")

    def work(lo, hi):
        _, s, g = samples(code, scheme, model, seed, lo, hi - lo)
        return s, g

    parts = map_ranges(work, count, BLOCK, threads)
    s = np.concatenate([p[0] for p in parts]) if parts else \
        np.zeros((0, code.num_checks), dtype=np.uint8)
    g = np.concatenate([p[1] for p in parts]) if parts else \
        np.zeros((0, scheme.rows), dtype=np.uint8)
    return Dataset(make_header(code, scheme, model, count, seed), s, g)


def _record_layout(header):
    sb = (header["syndrome_bits"] + 7) // 8
    gb = (header["diagnosis_bits"] + 7) // 8
    return sb, gb


def write_dataset(ds: Dataset, path) -> None:
    header = dict(ds.header)
    if header["count"] != len(ds):
        raise ContractViolation("header count does not match the payload")
    blob = json.dumps(header, sort_keys=True).encode()
    ps = gf2.pack(ds.s) if len(ds) else np.zeros((0, _record_layout(header)[0]), np.uint8)
    pg = gf2.pack(ds.g) if len(ds) else np.zeros((0, _record_layout(header)[1]), np.uint8)
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(np.concatenate([ps, pg], axis=1).tobytes())


def read_dataset(path) -> Dataset:
    raw = Path(path).read_bytes()
    if len(raw) < _PREFIX.size:
        raise CorruptPayload("file shorter than the fixed header")
    magic, version, hlen = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CorruptPayload(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"file version {version}, reader supports {FORMAT_VERSION}")
    start = _PREFIX.size + hlen
    if len(raw) < start:
        raise CorruptPayload("truncated header")
    try:
        header = json.loads(raw[_PREFIX.size:start].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayload(f"unreadable header: {exc}") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(f"header version {header.get('format_version')}")
    sb, gb = _record_layout(header)
    count = header["count"]
    payload = raw[start:]
    if len(payload) != count * (sb + gb):
        raise CorruptPayload(f"payload has {len(payload)} bytes, expected {count * (sb + gb)}")
    rec = np.frombuffer(payload, dtype=np.uint8).reshape(count, sb + gb)
    s = gf2.unpack(rec[:, :sb], header["syndrome_bits"])
    g = gf2.unpack(rec[:, sb:], header["diagnosis_bits"])
    return Dataset(header, s, g)
