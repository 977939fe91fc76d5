"""Binary trace file format.

Layout (little-endian):

    offset  size  field
    0       4     magic "PSTT"
    4       4     uint32 version (currently 1)
    8       8     float64 dt (s)
    16      8     float64 carrier_freq (rad/s)
    24      8     uint64 sample count N
    32      8     uint64 seed_id
    40      16*N  interleaved float64 (re, im) envelope samples

Files with a wrong magic, an unsupported version, or a payload shorter
than the declared count raise FormatError.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .sources import FieldTrace

__all__ = ["write_trace", "read_trace", "TRACE_MAGIC", "TRACE_VERSION"]

TRACE_MAGIC = b"PSTT"
TRACE_VERSION = 1
_HEADER = struct.Struct("<4sIddQQ")


def write_trace(trace: FieldTrace, path) -> None:
    """Write a FieldTrace to the documented binary layout."""
    samples = np.ascontiguousarray(trace.samples, dtype=np.complex128)
    interleaved = np.empty(2 * samples.size, dtype="<f8")
    interleaved[0::2] = samples.real
    interleaved[1::2] = samples.imag
    header = _HEADER.pack(
        TRACE_MAGIC,
        TRACE_VERSION,
        float(trace.dt),
        float(trace.carrier_freq),
        samples.size,
        trace.seed_id,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(interleaved.tobytes())


def read_trace(path) -> FieldTrace:
    """Read a FieldTrace written by write_trace."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise FormatError("trace file shorter than its header")
    magic, version, dt, carrier_freq, count, seed_id = _HEADER.unpack_from(blob)
    if magic != TRACE_MAGIC:
        raise FormatError(f"bad magic {magic!r}; not a trace file")
    if version != TRACE_VERSION:
        raise FormatError(f"unsupported trace version {version}")
    expected = _HEADER.size + 16 * count
    if len(blob) < expected:
        raise FormatError(
            f"truncated trace file: {len(blob)} bytes, expected {expected}"
        )
    flat = np.frombuffer(blob, dtype="<f8", count=2 * count, offset=_HEADER.size)
    samples = flat[0::2] + 1j * flat[1::2]
    return FieldTrace(samples, dt, carrier_freq, seed_id)
