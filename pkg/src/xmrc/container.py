"""The `.xmrc` binary container: the one on-disk/wire format for all carriers.

Layout (little-endian, 20-byte header):

    offset  size  field
    0       4     magic  = b"XMRC"
    4       2     version = 1 (u16)
    6       1     kind (u8): 1 IMAGE, 2 KSPACE, 3 MULTICOIL_KSPACE, 4 MASK, 5 COILMAPS
    7       1     reserved = 0
    8       4     nc (u32; 1 for kinds 1/2/4)
    12      4     ny (u32)
    16      4     nx (u32)

Payload: kinds 1/2/3/5 carry nc*ny*nx complex samples as interleaved
32-bit floats (re, im), row-major, coil-major; kind 4 carries ny*nx bytes,
each 0 or 1. No padding, no compression, no trailing bytes allowed.

Decoding never allocates storage based on unverified sizes: the expected
payload length is computed from the header and compared against the actual
byte count before any array is built.
"""

import struct

import numpy as np

from .errors import (
    BadHeader,
    BadMagic,
    InvalidMaskByte,
    NonFiniteSample,
    TrailingBytes,
    TruncatedPayload,
    UnsupportedVersion,
)
from .types import (
    CoilSensitivities,
    ComplexImage,
    KSpaceGrid,
    MultiCoilKSpace,
    SamplingMask,
)

MAGIC = b"XMRC"
VERSION = 1
HEADER = struct.Struct("<4sHBBIII")
HEADER_SIZE = HEADER.size  # 20

KIND_IMAGE = 1
KIND_KSPACE = 2
KIND_MULTICOIL_KSPACE = 3
KIND_MASK = 4
KIND_COILMAPS = 5

_KINDS = (KIND_IMAGE, KIND_KSPACE, KIND_MULTICOIL_KSPACE, KIND_MASK, KIND_COILMAPS)

FILE_EXTENSION = ".xmrc"


def kind_of(obj) -> int:
    """The kind byte a carrier serializes under."""
    if isinstance(obj, ComplexImage):
        return KIND_IMAGE
    if isinstance(obj, KSpaceGrid):
        return KIND_KSPACE
    if isinstance(obj, MultiCoilKSpace):
        return KIND_MULTICOIL_KSPACE
    if isinstance(obj, SamplingMask):
        return KIND_MASK
    if isinstance(obj, CoilSensitivities):
        return KIND_COILMAPS
    raise TypeError(f"no container kind for {type(obj).__name__}")


def _complex_payload(arr: np.ndarray) -> bytes:
    # interleaved (re, im) float32, row-major, coil-major, little-endian
    flat = np.ascontiguousarray(arr).astype("<c8")
    return flat.tobytes()


def write_container(obj) -> bytes:
    """Serialize any carrier to container bytes."""
    kind = kind_of(obj)
    if kind == KIND_MASK:
        nc, (ny, nx) = 1, obj.shape
        payload = obj.cells.tobytes()
    elif kind in (KIND_IMAGE, KIND_KSPACE):
        nc, (ny, nx) = 1, obj.shape
        payload = _complex_payload(obj.data)
    elif kind == KIND_MULTICOIL_KSPACE:
        nc, ny, nx = obj.shape
        payload = _complex_payload(obj.data)
    else:
        nc, ny, nx = obj.shape
        payload = _complex_payload(obj.maps)
    header = HEADER.pack(MAGIC, VERSION, kind, 0, nc, ny, nx)
    return header + payload


def read_container(data: bytes):
    """Parse container bytes back into a typed carrier.

    Raises a ContainerError subclass for any malformed input, and a type
    construction error (InvalidDimensions, UnnormalizedMaps, ...) when the
    payload is well-formed bytes but an invalid object.
    """
    data = bytes(data)
    if len(data) < 4:
        raise TruncatedPayload(f"only {len(data)} bytes, header needs {HEADER_SIZE}")
    if data[:4] != MAGIC:
        raise BadMagic(f"magic {data[:4]!r} != {MAGIC!r}")
    if len(data) < HEADER_SIZE:
        raise TruncatedPayload(f"only {len(data)} bytes, header needs {HEADER_SIZE}")
    _, version, kind, reserved, nc, ny, nx = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}, supported: {VERSION}")
    if kind not in _KINDS:
        raise BadHeader(f"unknown kind byte {kind}")
    if reserved != 0:
        raise BadHeader(f"reserved byte must be 0, got {reserved}")
    if nc < 1 or ny < 1 or nx < 1:
        raise BadHeader(f"dims must be >= 1, got nc={nc} ny={ny} nx={nx}")
    if kind in (KIND_IMAGE, KIND_KSPACE, KIND_MASK) and nc != 1:
        raise BadHeader(f"kind {kind} requires nc=1, got {nc}")

    cells_expected = nc * ny * nx  # python ints: no overflow
    expected = cells_expected if kind == KIND_MASK else cells_expected * 8
    actual = len(data) - HEADER_SIZE
    if actual < expected:
        raise TruncatedPayload(f"payload {actual} bytes, header declares {expected}")
    if actual > expected:
        raise TrailingBytes(f"{actual - expected} bytes after the declared payload")

    payload = data[HEADER_SIZE:]
    if kind == KIND_MASK:
        cells = np.frombuffer(payload, dtype=np.uint8)
        bad = ~np.isin(cells, (0, 1))
        if bad.any():
            raise InvalidMaskByte(f"mask byte {cells[bad][0]} at offset {int(np.flatnonzero(bad)[0])}")
        return SamplingMask(cells.reshape(ny, nx))

    samples = np.frombuffer(payload, dtype="<c8").astype(np.complex128)
    if not np.all(np.isfinite(samples)):
        raise NonFiniteSample("payload contains NaN or Inf")
    if kind == KIND_IMAGE:
        return ComplexImage(samples.reshape(ny, nx))
    if kind == KIND_KSPACE:
        return KSpaceGrid(samples.reshape(ny, nx), centered=True)
    if kind == KIND_MULTICOIL_KSPACE:
        return MultiCoilKSpace(samples.reshape(nc, ny, nx), centered=True)
    return CoilSensitivities(samples.reshape(nc, ny, nx))


def read_container_file(path):
    with open(path, "rb") as fh:
        return read_container(fh.read())


def write_container_file(path, obj) -> None:
    with open(path, "wb") as fh:
        fh.write(write_container(obj))
