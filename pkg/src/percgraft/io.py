"""Run configurations and configuration files.

Configuration file layout::

    b"PGCF"  | uint32 little-endian header length | JSON header | payload

The header lists payload sections ``{"name", "dtype", "length"}``; ``bits``
sections are ``numpy.packbits`` little bit order, ``int64`` sections raw
little-endian.  Every write goes through a temporary file and
``os.replace`` so readers never see partial output.
"""
from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from .lattice import Boundary, Kind, build_lattice
from .zoo import parse_animal

__all__ = [
    "ConfigError",
    "RunConfig",
    "atomic_write",
    "save_configuration",
    "load_configuration",
    "MAGIC",
]

MAGIC = b"PGCF"
FORMAT_VERSION = 1

MODELS = ("interchange", "corner", "loopon", "zoo")

_REQUIRED = {
    "interchange": {"beta"},
    "corner": {"p", "q"},
    "loopon": {"x", "n", "sweeps"},
    "zoo": {"lambda", "animal"},
}


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    model: str
    lattice: dict
    params: dict
    seed: int = 0
    analyses: list = field(default_factory=list)
    out: str | None = None
    format: str = "csv"

    def validate(self) -> "RunConfig":
        if self.model not in MODELS:
            raise ConfigError("model", f"unknown model {self.model!r}; choose from {MODELS}")
        try:
            kind = Kind(self.lattice.get("kind"))
            Boundary(self.lattice.get("boundary", "free"))
        except ValueError as err:
            raise ConfigError("lattice", str(err)) from None
        dims = self.lattice.get("dims")
        if not isinstance(dims, (list, tuple)) or not dims or \
                any(not isinstance(d, int) or d <= 0 for d in dims):
            raise ConfigError("lattice.dims", f"expected positive integers, got {dims!r}")
        missing = _REQUIRED[self.model] - set(self.params)
        if missing:
            raise ConfigError("params", f"missing {sorted(missing)} for {self.model}")
        p = self.params
        if self.model == "interchange" and not p["beta"] >= 0:
            raise ConfigError("params.beta", "must be non-negative")
        if self.model == "corner":
            if kind is not Kind.Z2_WINDOW:
                raise ConfigError("lattice.kind", "corner percolation runs on z2_window")
            for k in ("p", "q"):
                if not 0 <= p[k] <= 1:
                    raise ConfigError(f"params.{k}", "must lie in [0, 1]")
        if self.model == "loopon":
            for k in ("x", "n"):
                if not p[k] >= 0:
                    raise ConfigError(f"params.{k}", "must be non-negative")
            if not (isinstance(p["sweeps"], int) and p["sweeps"] >= 0):
                raise ConfigError("params.sweeps", "must be a non-negative integer")
        if self.model == "zoo":
            if not p["lambda"] >= 0:
                raise ConfigError("params.lambda", "must be non-negative")
            if kind not in (Kind.Z2_WINDOW, Kind.Z2_TORUS):
                raise ConfigError("lattice.kind", "the zoo runs on z2_window or z2_torus")
            try:
                parse_animal(p["animal"])
            except ValueError as err:
                raise ConfigError("params.animal", str(err)) from None
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "must be csv or json")
        try:
            build_lattice(kind, dims, self.lattice.get("boundary", "free"))
        except ValueError as err:
            raise ConfigError("lattice", str(err)) from None
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        return cls(**data)

    def graph(self):
        return build_lattice(self.lattice["kind"], self.lattice["dims"],
                             self.lattice.get("boundary", "free"))


def atomic_write(path, data: bytes | str) -> None:
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    if isinstance(data, str):
        data = data.encode()
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _encode_section(arr: np.ndarray) -> tuple[str, bytes]:
    arr = np.asarray(arr)
    if arr.dtype == bool:
        return "bits", np.packbits(arr, bitorder="little").tobytes()
    return "int64", arr.astype("<i8").tobytes()


def save_configuration(path, header: dict, sections: dict) -> None:
    """Persist named arrays (bool -> bitset, integer -> int64) with a JSON header."""
    payload = []
    meta = []
    for name, arr in sections.items():
        arr = np.asarray(arr).ravel()
        dtype, blob = _encode_section(arr)
        meta.append({"name": name, "dtype": dtype, "length": int(arr.size)})
        payload.append(blob)
    head = dict(header)
    head["format_version"] = FORMAT_VERSION
    head["sections"] = meta
    hb = json.dumps(head, sort_keys=True).encode()
    atomic_write(path, MAGIC + struct.pack("<I", len(hb)) + hb + b"".join(payload))


def load_configuration(path) -> tuple[dict, dict]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a configuration file")
    (n,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8:8 + n])
    pos = 8 + n
    out = {}
    for sec in header["sections"]:
        L = sec["length"]
        if sec["dtype"] == "bits":
            nbytes = (L + 7) // 8
            buf = np.frombuffer(raw, dtype=np.uint8, count=nbytes, offset=pos)
            out[sec["name"]] = np.unpackbits(buf, bitorder="little")[:L].astype(bool)
        else:
            nbytes = 8 * L
            out[sec["name"]] = np.frombuffer(raw, dtype="<i8", count=L, offset=pos).copy()
        pos += nbytes
    if pos != len(raw):
        raise ValueError(f"{path}: trailing or missing payload bytes")
    return header, out
