"""PLY reader/writer for voxel clouds (ascii and binary_little_endian).

Supported layout: a single vertex element with x/y/z positions (any integer
or float scalar type) and red/green/blue uchar colors.  Float positions are
accepted only when they land on integers after the caller-supplied scale and
offset; anything else is rejected rather than silently quantized.
"""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud, ValidationError

_SCALAR_TYPES = {
    "char": ("b", 1),
    "int8": ("b", 1),
    "uchar": ("B", 1),
    "uint8": ("B", 1),
    "short": ("h", 2),
    "int16": ("h", 2),
    "ushort": ("H", 2),
    "uint16": ("H", 2),
    "int": ("i", 4),
    "int32": ("i", 4),
    "uint": ("I", 4),
    "uint32": ("I", 4),
    "float": ("f", 4),
    "float32": ("f", 4),
    "double": ("d", 8),
    "float64": ("d", 8),
}

_POSITION_NAMES = ("x", "y", "z")
_COLOR_NAMES = ("red", "green", "blue")


class PlyError(ValidationError):
    """Malformed or unsupported PLY content."""


def _parse_header(stream) -> tuple[str, int, list[tuple[str, str]]]:
    line = stream.readline()
    if line.strip() != b"ply":
        raise PlyError("not a PLY file (missing 'ply' magic line)")
    fmt = None
    count = None
    props: list[tuple[str, str]] = []
    in_vertex = False
    while True:
        raw = stream.readline()
        if not raw:
            raise PlyError("unterminated PLY header")
        tokens = raw.decode("ascii", errors="replace").strip().split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] not in (
                "ascii",
                "binary_little_endian",
            ):
                raise PlyError(f"unsupported PLY format {tokens[1:]}")
            fmt = tokens[1]
        elif tokens[0] == "element":
            if tokens[1] == "vertex":
                in_vertex = True
                count = int(tokens[2])
            else:
                raise PlyError(f"unsupported element '{tokens[1]}'")
        elif tokens[0] == "property":
            if not in_vertex:
                raise PlyError("property outside vertex element")
            if tokens[1] == "list":
                raise PlyError("list properties are not supported")
            ptype, pname = tokens[1], tokens[2]
            if ptype not in _SCALAR_TYPES:
                raise PlyError(f"unsupported property type '{ptype}'")
            props.append((pname, ptype))
        elif tokens[0] == "end_header":
            break
        else:
            raise PlyError(f"unsupported header line '{tokens[0]}'")
    if fmt is None or count is None:
        raise PlyError("PLY header missing format or vertex element")
    names = [p[0] for p in props]
    for required in _POSITION_NAMES + _COLOR_NAMES:
        if required not in names:
            raise PlyError(f"missing vertex property '{required}'")
    extra = set(names) - set(_POSITION_NAMES + _COLOR_NAMES)
    if extra:
        raise PlyError(f"unsupported vertex properties {sorted(extra)}")
    for cname in _COLOR_NAMES:
        ctype = dict(props)[cname]
        if _SCALAR_TYPES[ctype][0] != "B":
            raise PlyError(f"color property '{cname}' must be uchar")
    return fmt, count, props


def _positions_to_int(pos: np.ndarray, scale: float, offset) -> np.ndarray:
    adjusted = pos * float(scale) + np.asarray(offset, dtype=np.float64)
    rounded = np.rint(adjusted)
    if not np.allclose(adjusted, rounded, rtol=0.0, atol=1e-6):
        worst = np.abs(adjusted - rounded).max()
        raise PlyError(
            "float positions are not integral after scale/offset "
            f"(max deviation {worst:.3g}); pass --scale/--offset to fix"
        )
    return rounded.astype(np.int64)


def read_ply(path, *, scale: float = 1.0, offset=(0.0, 0.0, 0.0)) -> PointCloud:
    """Read a voxel cloud.  Channels are returned exactly as stored."""
    with open(path, "rb") as stream:
        fmt, count, props = _parse_header(stream)
        if count < 1:
            raise PlyError("empty vertex element")
        if fmt == "ascii":
            rows = []
            for i in range(count):
                line = stream.readline()
                if not line:
                    raise PlyError(f"truncated ascii body at vertex {i}")
                parts = line.split()
                if len(parts) != len(props):
                    raise PlyError(f"vertex {i} has {len(parts)} fields, "
                                   f"expected {len(props)}")
                rows.append([float(v) for v in parts])
            table = np.asarray(rows, dtype=np.float64)
        else:
            dtype = np.dtype(
                [(name, "<" + _SCALAR_TYPES[t][0]) for name, t in props]
            )
            blob = stream.read(dtype.itemsize * count)
            if len(blob) != dtype.itemsize * count:
                raise PlyError("truncated binary body")
            records = np.frombuffer(blob, dtype=dtype)
            table = np.column_stack(
                [records[name].astype(np.float64) for name, _ in props]
            )
    col_index = {name: i for i, (name, _) in enumerate(props)}
    pos = table[:, [col_index[n] for n in _POSITION_NAMES]]
    float_pos = any(
        _SCALAR_TYPES[dict(props)[n]][0] in ("f", "d") for n in _POSITION_NAMES
    )
    if float_pos:
        positions = _positions_to_int(pos, scale, offset)
    else:
        positions = pos.astype(np.int64)
        if scale != 1.0 or np.any(np.asarray(offset) != 0.0):
            positions = _positions_to_int(pos, scale, offset)
    colors = table[:, [col_index[n] for n in _COLOR_NAMES]]
    if colors.min() < 0 or colors.max() > 255:
        raise PlyError("color values out of [0, 255]")
    return PointCloud(positions, colors.astype(np.uint8))


def write_ply(path, cloud: PointCloud, *, ascii: bool = False) -> None:
    """Write a voxel cloud with int32 positions and uchar colors."""
    fmt = "ascii" if ascii else "binary_little_endian"
    header = (
        "ply\n"
        f"format {fmt} 1.0\n"
        f"element vertex {cloud.n}\n"
        "property int x\n"
        "property int y\n"
        "property int z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        "end_header\n"
    )
    with open(path, "wb") as stream:
        stream.write(header.encode("ascii"))
        if ascii:
            for p, c in zip(cloud.positions, cloud.colors):
                stream.write(
                    f"{p[0]} {p[1]} {p[2]} {c[0]} {c[1]} {c[2]}\n".encode("ascii")
                )
        else:
            dtype = np.dtype(
                [("x", "<i4"), ("y", "<i4"), ("z", "<i4"),
                 ("red", "u1"), ("green", "u1"), ("blue", "u1")]
            )
            records = np.empty(cloud.n, dtype=dtype)
            for i, name in enumerate(("x", "y", "z")):
                records[name] = cloud.positions[:, i]
            for i, name in enumerate(("red", "green", "blue")):
                records[name] = cloud.colors[:, i]
            stream.write(records.tobytes())
