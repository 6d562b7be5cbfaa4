"""Binary field checkpoints with bit-exact round trips.

Layout (all little-endian, fixed width, no serialization dependency):

    offset  size  content
    0       8     magic b"NSTFLD01"
    8       4     format version (uint32, currently 1)
    12      4     truncation rule code (uint32: 0 ball, 1 cube)
    16      4     k_max (int32)
    20      4     reserved (uint32, zero)
    24      8     record count (uint64)
    32      60*n  records: kx, ky, kz (int32 each) then re/im interleaved
                  float64 pairs for the three complex components

Only supported (nonzero) sites are stored. Loading validates the header,
the byte length, and site membership, and never returns a partial field.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .fields import SpectralField
from .lattice import LatticeSpec, TruncationRule, get_lattice

__all__ = ["save_field", "load_field", "MAGIC", "FORMAT_VERSION"]

MAGIC = b"NSTFLD01"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIIiIQ")
_RULE_CODES = {TruncationRule.EUCLIDEAN_BALL: 0, TruncationRule.SUP_CUBE: 1}
_CODE_RULES = {v: k for k, v in _RULE_CODES.items()}
_RECORD_DTYPE = np.dtype([("site", "<i4", (3,)), ("value", "<f8", (6,))])


def save_field(field: SpectralField, path) -> None:
    """Write the supported sites of a field; load_field inverts bit-exactly."""
    lat = field.lattice
    mags = field.magnitudes()
    idx = np.flatnonzero(mags > 0)
    records = np.empty(len(idx), dtype=_RECORD_DTYPE)
    records["site"] = lat.sites[idx].astype("<i4")
    values = np.ascontiguousarray(field.data[idx])
    records["value"] = values.view(np.float64).reshape(len(idx), 6)
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, _RULE_CODES[lat.spec.truncation_rule],
        lat.spec.k_max, 0, len(idx),
    )
    Path(path).write_bytes(header + records.tobytes())


def load_field(path, expected_spec: LatticeSpec | None = None) -> SpectralField:
    """Read a checkpoint back; rejects bad magic, version, truncation, or a
    lattice differing from expected_spec when one is given."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise CheckpointError(f"{path}: file too short for a checkpoint header")
    magic, version, rule_code, k_max, _, count = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    if rule_code not in _CODE_RULES:
        raise CheckpointError(f"{path}: unknown truncation rule code {rule_code}")
    try:
        spec = LatticeSpec(k_max, _CODE_RULES[rule_code])
    except ValueError as exc:
        raise CheckpointError(f"{path}: {exc}") from None
    if expected_spec is not None and spec != expected_spec:
        raise CheckpointError(
            f"{path}: lattice mismatch (file has k_max={spec.k_max} "
            f"{spec.truncation_rule.value}, expected k_max={expected_spec.k_max} "
            f"{expected_spec.truncation_rule.value})"
        )
    body = blob[_HEADER.size:]
    if len(body) != count * _RECORD_DTYPE.itemsize:
        raise CheckpointError(
            f"{path}: truncated or oversized body "
            f"({len(body)} bytes for {count} records)"
        )
    lat = get_lattice(spec)
    data = np.zeros((len(lat), 3), dtype=np.complex128)
    if count:
        records = np.frombuffer(body, dtype=_RECORD_DTYPE)
        sites = records["site"].astype(np.int64)
        seen = set()
        rows = []
        for s in map(tuple, sites.tolist()):
            if s not in lat.index:
                raise CheckpointError(f"{path}: site {s} is outside the lattice")
            if s in seen:
                raise CheckpointError(f"{path}: duplicate site {s}")
            seen.add(s)
            rows.append(lat.index[s])
        values = np.ascontiguousarray(records["value"]).view(np.complex128)
        data[np.asarray(rows)] = values.reshape(int(count), 3)
    return SpectralField(lat, data)
