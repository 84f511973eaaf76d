"""On-disk formats: event files, Middlebury .flo, grayscale images, tensors.

Event binary layout (little-endian): 16-byte magic field ("EVST0001"
padded with zeros), u32 width, u32 height, u64 count, f64 t_start,
f64 t_end, then `count` packed records of (u16 x, u16 y, f64 t, i8 p).
The text form is a `# evst W H` header followed by `t x y p` lines.

The tensor container ("CWTS0001") stores a manifest of named f32 tensors
followed by their raw data and a trailing CRC32; network weights and
encoded voxel grids both use it.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InputFormatError
from ..events import EventStream
from ..sparse.cista import ArchConfig, CistaWeights
from ..warp import FlowField

EVENT_MAGIC = b"EVST0001"
TENSOR_MAGIC = b"CWTS0001"
FLO_MAGIC = 202021.25

_EVENT_RECORD = np.dtype([("x", "<u2"), ("y", "<u2"), ("t", "<f8"), ("p", "<i1")])


def write_events(path, events: EventStream, fmt: str = "binary") -> None:
    path = Path(path)
    if fmt == "binary":
        _write_events_binary(path, events)
    elif fmt == "text":
        _write_events_text(path, events)
    else:
        raise ConfigError(f"unknown event format {fmt!r}")


def _write_events_binary(path: Path, events: EventStream) -> None:
    if len(events):
        if events.xs.max() >= 65536 or events.ys.max() >= 65536:
            raise ConfigError("coordinates exceed the u16 range of the format")
    rec = np.empty(len(events), dtype=_EVENT_RECORD)
    rec["x"] = events.xs
    rec["y"] = events.ys
    rec["t"] = events.ts
    rec["p"] = events.ps
    header = EVENT_MAGIC.ljust(16, b"\0") + struct.pack(
        "<IIQdd", events.width, events.height, len(events), events.t_start, events.t_end
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rec.tobytes())


def _write_events_text(path: Path, events: EventStream) -> None:
    with open(path, "w") as fh:
        fh.write(f"# evst {events.width} {events.height}\n")
        for i in range(len(events)):
            fh.write(f"{events.ts[i]!r} {events.xs[i]} {events.ys[i]} {events.ps[i]}\n")


def read_events(path) -> EventStream:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head == EVENT_MAGIC:
        return _read_events_binary(path)
    return _read_events_text(path)


def _read_events_binary(path: Path) -> EventStream:
    data = Path(path).read_bytes()
    if len(data) < 48 or data[:8] != EVENT_MAGIC:
        raise InputFormatError(f"{path}: not an event file (bad magic)")
    width, height, count, t_start, t_end = struct.unpack("<IIQdd", data[16:48])
    body = data[48:]
    need = count * _EVENT_RECORD.itemsize
    if len(body) != need:
        raise InputFormatError(
            f"{path}: truncated event file ({len(body)} body bytes, expected {need})"
        )
    rec = np.frombuffer(body, dtype=_EVENT_RECORD)
    try:
        return EventStream.from_arrays(
            rec["x"].astype(np.int64),
            rec["y"].astype(np.int64),
            rec["t"].astype(np.float64),
            rec["p"].astype(np.int8),
            width,
            height,
            t_start=t_start,
            t_end=t_end,
            sort=False,
        )
    except ConfigError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def _read_events_text(path: Path) -> EventStream:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[:2] != ["#", "evst"]:
            raise InputFormatError(f"{path}: missing '# evst W H' header")
        width, height = int(header[2]), int(header[3])
        ts, xs, ys, ps = [], [], [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise InputFormatError(f"{path}:{lineno}: expected 't x y p'")
            ts.append(float(parts[0]))
            xs.append(int(parts[1]))
            ys.append(int(parts[2]))
            ps.append(int(parts[3]))
    try:
        return EventStream.from_arrays(xs, ys, ts, ps, width, height, sort=False)
    except ConfigError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def write_flo(path, flow: FlowField) -> None:
    if not (np.isfinite(flow.u).all() and np.isfinite(flow.v).all()):
        raise ConfigError("refusing to write non-finite flow values")
    data = np.empty((flow.height, flow.width, 2), dtype="<f4")
    data[..., 0] = flow.u
    data[..., 1] = flow.v
    with open(path, "wb") as fh:
        fh.write(np.float32(FLO_MAGIC).tobytes())
        fh.write(struct.pack("<ii", flow.width, flow.height))
        fh.write(data.tobytes())


def read_flo(path) -> FlowField:
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise InputFormatError(f"{path}: too short for a .flo file")
    magic = np.frombuffer(data[:4], dtype="<f4")[0]
    if magic != np.float32(FLO_MAGIC):
        raise InputFormatError(f"{path}: bad .flo magic {magic!r}")
    width, height = struct.unpack("<ii", data[4:12])
    need = width * height * 2 * 4
    if len(data) - 12 != need:
        raise InputFormatError(f"{path}: size mismatch for {width}x{height} flow")
    uv = np.frombuffer(data[12:], dtype="<f4").reshape(height, width, 2)
    return FlowField(uv[..., 0].astype(np.float64), uv[..., 1].astype(np.float64))


def write_image(path, frame: np.ndarray, bits: int = 8) -> None:
    """Write a [0, 1] frame as 8/16-bit PGM or PNG, chosen by suffix."""
    path = Path(path)
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise ConfigError("image frames must be 2-d")
    if bits not in (8, 16):
        raise ConfigError("supported bit depths: 8, 16")
    peak = 255 if bits == 8 else 65535
    q = np.rint(np.clip(frame, 0.0, 1.0) * peak)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        arr = q.astype(">u1" if bits == 8 else ">u2")
        with open(path, "wb") as fh:
            fh.write(f"P5\n{frame.shape[1]} {frame.shape[0]}\n{peak}\n".encode())
            fh.write(arr.tobytes())
    elif suffix == ".png":
        from PIL import Image

        if bits == 8:
            Image.fromarray(q.astype(np.uint8), mode="L").save(path)
        else:
            Image.fromarray(q.astype(np.uint32), mode="I").save(path, bits=16)
    else:
        raise ConfigError(f"unsupported image suffix {path.suffix!r}")


def read_image(path) -> np.ndarray:
    """Read an 8/16-bit grayscale PGM or PNG into a [0, 1] frame."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return _read_pgm(path)
    from PIL import Image

    try:
        with Image.open(path) as im:
            if im.mode in ("I", "I;16", "I;16B"):
                arr = np.asarray(im, dtype=np.float64)
                return arr / 65535.0
            arr = np.asarray(im.convert("L"), dtype=np.float64)
            return arr / 255.0
    except OSError as exc:
        raise InputFormatError(f"{path}: cannot read image: {exc}") from exc


def _read_pgm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise InputFormatError(f"{path}: only binary (P5) PGM supported")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(f) for f in fields)
    if maxval not in (255, 65535):
        raise InputFormatError(f"{path}: unsupported PGM depth {maxval}")
    dtype = ">u1" if maxval == 255 else ">u2"
    need = width * height * np.dtype(dtype).itemsize
    body = data[pos : pos + need]
    if len(body) != need:
        raise InputFormatError(f"{path}: truncated PGM body")
    arr = np.frombuffer(body, dtype=dtype).reshape(height, width).astype(np.float64)
    return arr / maxval


def normalize_frame(frame: np.ndarray) -> np.ndarray:
    """Affine rescale to span [0, 1]; constant frames pass through."""
    frame = np.asarray(frame, dtype=np.float64)
    lo = float(frame.min())
    hi = float(frame.max())
    if hi <= lo:
        return frame.copy()
    return (frame - lo) / (hi - lo)


def write_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    """Named-f32-tensor container with a trailing CRC32."""
    chunks = [TENSOR_MAGIC, struct.pack("<I", len(tensors))]
    payload = []
    for name, arr in tensors.items():
        arr32 = np.ascontiguousarray(arr, dtype="<f4")
        encoded = name.encode()
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<BB", 0, arr32.ndim))
        chunks.append(struct.pack(f"<{arr32.ndim}I", *arr32.shape))
        payload.append(arr32.tobytes())
    body = b"".join(chunks) + b"".join(payload)
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<I", crc))


def read_tensors(path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:8] != TENSOR_MAGIC:
        raise InputFormatError(f"{path}: not a tensor container (bad magic)")
    body, tail = data[:-4], data[-4:]
    if struct.unpack("<I", tail)[0] != (zlib.crc32(body) & 0xFFFFFFFF):
        raise InputFormatError(f"{path}: checksum failure")
    pos = 8
    (count,) = struct.unpack_from("<I", body, pos)
    pos += 4
    manifest: list[tuple[str, tuple[int, ...]]] = []
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", body, pos)
        pos += 2
        name = body[pos : pos + name_len].decode()
        pos += name_len
        dtype_code, ndim = struct.unpack_from("<BB", body, pos)
        pos += 2
        if dtype_code != 0:
            raise InputFormatError(f"{path}: unknown dtype code {dtype_code} for {name}")
        shape = struct.unpack_from(f"<{ndim}I", body, pos)
        pos += 4 * ndim
        manifest.append((name, shape))
    tensors = {}
    for name, shape in manifest:
        n = int(np.prod(shape, dtype=np.int64)) if shape else 1
        raw = body[pos : pos + 4 * n]
        if len(raw) != 4 * n:
            raise InputFormatError(f"{path}: truncated tensor data for {name}")
        pos += 4 * n
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)
    if pos != len(body):
        raise InputFormatError(f"{path}: trailing bytes after tensor data")
    return tensors


_ARCH_META = "arch.meta"


def write_weights(path, weights: CistaWeights) -> None:
    arch = weights.arch
    tensors = dict(weights.tensors)
    tensors[_ARCH_META] = np.array(
        [arch.bins, arch.feature_channels, arch.code_channels, arch.kernel_size, arch.num_blocks],
        dtype=np.float64,
    )
    write_tensors(path, tensors)


def read_weights(path) -> CistaWeights:
    tensors = read_tensors(path)
    meta = tensors.pop(_ARCH_META, None)
    if meta is None or meta.shape != (5,):
        raise InputFormatError(f"{path}: missing architecture metadata")
    arch = ArchConfig(
        bins=int(meta[0]),
        feature_channels=int(meta[1]),
        code_channels=int(meta[2]),
        kernel_size=int(meta[3]),
        num_blocks=int(meta[4]),
    )
    try:
        return CistaWeights(arch, tensors)
    except ConfigError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def write_manifest(path, entries: list[dict], kind: str) -> None:
    with open(path, "w") as fh:
        json.dump({kind: entries}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_manifest(path, kind: str) -> list[dict]:
    with open(path) as fh:
        data = json.load(fh)
    if kind not in data:
        raise InputFormatError(f"{path}: manifest lacks {kind!r}")
    return data[kind]
