"""On-disk mesh cache.

A file holds one JSON header line, then ``(n+1)^3`` little-endian float64
values in C order (z index fastest).  Writes go to a temp file in the same
directory and are renamed into place, so readers never see a torn file.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .envelope import Mesh3
from .errors import CacheCorruptionError


VERSION = 1
KINDS = ("G", "Genv", "Gmono", "GenvMono", "Gsmooth", "Gmerged", "GenvRig")
ENV_VAR = "POLAR_SCALING_CACHE"
_DTYPE = np.dtype("<f8")


def default_cache_dir(explicit=None) -> Path:
    """The environment variable wins over an explicit directory."""
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    if explicit:
        return Path(explicit)
    return Path.home() / ".cache" / "polar_scaling"


def write_mesh(path, m: Mesh3, tol: float) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps({"version": VERSION, "n": int(m.n), "kind": m.kind, "tol": float(tol)})
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header.encode("ascii") + b"\n")
            fh.write(np.ascontiguousarray(m.values, dtype=_DTYPE).tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        line = fh.readline()
    try:
        head = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CacheCorruptionError(f"{path}: unreadable header") from exc
    if not isinstance(head, dict) or not {"version", "n", "kind", "tol"} <= head.keys():
        raise CacheCorruptionError(f"{path}: header is missing fields")
    return head


def read_mesh(path, expect: dict | None = None) -> Mesh3:
    """Load a mesh, checking the header against ``expect`` and the payload size."""
    path = Path(path)
    head = read_header(path)
    if head["version"] != VERSION:
        raise CacheCorruptionError(f"{path}: version {head['version']} != {VERSION}")
    if head["kind"] not in KINDS:
        raise CacheCorruptionError(f"{path}: unknown kind {head['kind']!r}")
    for key, want in (expect or {}).items():
        if head.get(key) != want:
            raise CacheCorruptionError(f"{path}: header {key}={head.get(key)!r}, expected {want!r}")
    n = int(head["n"])
    with open(path, "rb") as fh:
        fh.readline()
        raw = fh.read()
    want_bytes = (n + 1) ** 3 * _DTYPE.itemsize
    if len(raw) != want_bytes:
        raise CacheCorruptionError(f"{path}: payload is {len(raw)} bytes, expected {want_bytes}")
    vals = np.frombuffer(raw, dtype=_DTYPE).astype(float).reshape((n + 1,) * 3)
    return Mesh3(n, vals, head["kind"], {"tol": head["tol"]})


class MeshCache:
    """Directory of cached meshes keyed by (kind, n, tol, version)."""

    def __init__(self, root=None):
        self.root = default_cache_dir(root)
        self.hits: list[str] = []
        self.built: list[str] = []

    def path(self, kind: str, n: int, tol: float) -> Path:
        return self.root / f"{kind}_n{n}_tol{tol:.3g}_v{VERSION}.mesh"

    def get(self, kind: str, n: int, tol: float, build):
        """Return the cached mesh, or call ``build()`` and store its result.

        Raises CacheCorruptionError if the file exists but does not check out.
        """
        p = self.path(kind, n, tol)
        if p.exists():
            # a corrupt file raises; deleting it is left to the user
            m = read_mesh(p, {"n": n, "kind": kind, "tol": tol})
            self.hits.append(kind)
            return m
        m = build()
        if m.kind != kind:
            m = m.copy(kind)
        write_mesh(p, m, tol)
        self.built.append(kind)
        return m
