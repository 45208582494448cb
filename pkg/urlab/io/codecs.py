"""
File codecs for boundary samples, probe batches and lattice fields

Boundary files are columnar text: a header line `n d count`, then one
`x1 ... xn w` row per atom. Probe files hold one `X... delta D grad...
hess...` row per probe. Field files are binary (little-endian): magic,
version, dimensions, spacing, box corners and a run-length encoded node
mask, then float64 values in row-major order; a JSON sidecar carries the
provenance.
"""

import json
import struct
from pathlib import Path
from typing import Any, BinaryIO

import numpy as np

from ..constants import CSV_FLOAT_FORMAT, FIELD_FORMAT_VERSION, FIELD_MAGIC
from ..elliptic.grid import RANKS, GridField
from ..exceptions import ConfigError, DimensionError, ParameterError
from ..geometry.boundary import BoundarySample, make_boundary
from ..geometry.domain import DomainBox
from ..models.serialization import ModelEncoder
from ..smoothdist.field import SmoothDistanceValues

TEXT_FLOAT = "%.17g"


def write_boundary(sample: BoundarySample, path: str | Path) -> Path:
    """Write the atoms of a sample in the columnar text format"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    d = int(sample.d) if float(sample.d).is_integer() else sample.d
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{sample.n} {d} {sample.count}\n")
        for point, weight in zip(sample.points, sample.weights, strict=True):
            row = " ".join(TEXT_FLOAT % x for x in point)
            handle.write(f"{row} {TEXT_FLOAT % weight}\n")
    return path


def read_boundary(path: str | Path) -> BoundarySample:
    """
    Read a columnar boundary file into a custom sample.

    Raises:
        ConfigError: If the header or row shape is malformed
    """
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 3:
            raise ConfigError(f"Boundary header must be `n d count`: {path}", config_key="boundary.file")
        try:
            n, d, count = int(header[0]), float(header[1]), int(header[2])
        except ValueError as exc:
            raise ConfigError(f"Malformed boundary header in {path}", config_key="boundary.file") from exc
        rows = np.loadtxt(handle, dtype=float, ndmin=2)
    if rows.shape != (count, n + 1):
        raise ConfigError(
            f"Expected {count} rows of {n + 1} columns in {path}, found {rows.shape}",
            config_key="boundary.file",
        )
    return make_boundary(
        "custom",
        {"points": rows[:, :n], "weights": rows[:, n], "d": int(d) if d.is_integer() else d},
    )


def write_probes(
    path: str | Path,
    X: np.ndarray,
    delta: np.ndarray,
    values: SmoothDistanceValues,
) -> Path:
    """Write one `X... delta D grad... hess...` row per probe; missing orders are omitted"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = X.shape[0]
    columns = [X, np.asarray(delta, dtype=float).reshape(p, 1), np.asarray(values.D).reshape(p, 1)]
    if values.grad_D is not None:
        columns.append(np.asarray(values.grad_D).reshape(p, -1))
    if values.hess_D is not None:
        columns.append(np.asarray(values.hess_D).reshape(p, -1))
    table = np.hstack(columns)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, fmt=CSV_FLOAT_FORMAT, delimiter=" ", newline="\n")
    return path


def read_probes(path: str | Path, n: int) -> dict[str, np.ndarray]:
    """
    Read a probe batch written by write_probes.

    Files with only n columns are plain probe lists (input batches).
    """
    table = np.loadtxt(Path(path), dtype=float, ndmin=2)
    width = table.shape[1]
    out: dict[str, np.ndarray] = {"X": table[:, :n]}
    if width == n:
        return out
    if width not in (n + 2, 2 * n + 2, n * n + 2 * n + 2):
        raise DimensionError(f"Probe file has {width} columns, not a layout for n={n}", n=n)
    out["delta"] = table[:, n]
    out["D"] = table[:, n + 1]
    if width >= 2 * n + 2:
        out["grad_D"] = table[:, n + 2 : 2 * n + 2]
    if width == n * n + 2 * n + 2:
        out["hess_D"] = table[:, 2 * n + 2 :].reshape(-1, n, n)
    return out


def _encode_runs(flat: np.ndarray) -> np.ndarray:
    """(value, length) pairs of a 1-D integer array"""
    if flat.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    edges = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate([[0], edges])
    lengths = np.diff(np.concatenate([starts, [flat.size]]))
    return np.column_stack([flat[starts], lengths]).astype(np.int64)


def _decode_runs(runs: np.ndarray) -> np.ndarray:
    return np.repeat(runs[:, 0], runs[:, 1])


def _read_exact(handle: BinaryIO, size: int) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise ParameterError("Field file is truncated")
    return data


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_field(field_: GridField, path: str | Path, provenance: dict[str, Any] | None = None) -> Path:
    """
    Write a field in the binary layout plus its JSON sidecar.

    The mask stores NodeKind codes, or -1 where the node is not defined for
    this field (valid mask), so the defined set round-trips.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = field_.n
    codes = field_.mask.astype(np.int64)
    codes[~field_.defined] = -1
    runs = _encode_runs(codes.reshape(-1))

    with open(path, "wb") as handle:
        handle.write(FIELD_MAGIC)
        handle.write(struct.pack("<IIB", FIELD_FORMAT_VERSION, n, RANKS.index(field_.rank)))
        handle.write(np.asarray(field_.shape, dtype="<u8").tobytes())
        handle.write(struct.pack("<dd", field_.h, field_.h_bc))
        handle.write(field_.domain.lower.astype("<f8").tobytes())
        handle.write(field_.domain.upper.astype("<f8").tobytes())
        handle.write(struct.pack("<Q", runs.shape[0]))
        handle.write(runs.astype("<i8").tobytes())
        handle.write(np.ascontiguousarray(field_.values, dtype="<f8").tobytes())

    sidecar = {
        "format_version": FIELD_FORMAT_VERSION,
        "shape": list(field_.shape),
        "rank": field_.rank,
        "h": field_.h,
        "metadata": field_.metadata,
        "provenance": provenance or {},
    }
    with open(_sidecar_path(path), "w", encoding="utf-8", newline="\n") as handle:
        json.dump(sidecar, handle, cls=ModelEncoder, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def read_field(path: str | Path, domain: DomainBox) -> GridField:
    """
    Read a binary field written over the given domain.

    Distances are recomputed from the domain; its corners must match the
    header.

    Raises:
        ParameterError: On a bad magic, version or corner mismatch
    """
    path = Path(path)
    with open(path, "rb") as handle:
        if _read_exact(handle, len(FIELD_MAGIC)) != FIELD_MAGIC:
            raise ParameterError(f"{path} is not a field file")
        version, n, rank_code = struct.unpack("<IIB", _read_exact(handle, 9))
        if version != FIELD_FORMAT_VERSION:
            raise ParameterError(f"Unsupported field format version {version}", "version", version)
        shape = tuple(int(s) for s in np.frombuffer(_read_exact(handle, 8 * n), dtype="<u8"))
        h, h_bc = struct.unpack("<dd", _read_exact(handle, 16))
        lower = np.frombuffer(_read_exact(handle, 8 * n), dtype="<f8")
        upper = np.frombuffer(_read_exact(handle, 8 * n), dtype="<f8")
        (run_count,) = struct.unpack("<Q", _read_exact(handle, 8))
        runs = np.frombuffer(_read_exact(handle, 16 * run_count), dtype="<i8").reshape(-1, 2)
        rank = RANKS[rank_code]
        trailing = {"scalar": (), "vector": (n,), "matrix": (n, n)}[rank]
        count = int(np.prod(shape + trailing))
        values = np.frombuffer(_read_exact(handle, 8 * count), dtype="<f8").reshape(shape + trailing)

    if n != domain.n or not (np.allclose(lower, domain.lower) and np.allclose(upper, domain.upper)):
        raise ParameterError(
            "Field box does not match the domain",
            context={"lower": lower.tolist(), "upper": upper.tolist()},
        )
    codes = _decode_runs(runs).reshape(shape)
    template = GridField.template(domain, h, h_bc)
    if template.shape != shape:
        raise ParameterError("Field lattice does not match the domain lattice", context={"shape": shape})

    metadata: dict[str, Any] = {}
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        with open(sidecar, encoding="utf-8") as handle:
            metadata = json.load(handle).get("metadata", {})
    defined = codes >= 0
    mask = np.where(defined, codes, template.mask).astype(np.int8)
    return GridField(
        domain=domain,
        h=h,
        values=values.copy(),
        mask=mask,
        delta=template.delta,
        h_bc=h_bc,
        rank=rank,
        valid=None if np.array_equal(defined, mask != 0) else defined,
        metadata=metadata,
    )
