"""Binary graph snapshots: magic "DXG1", version u16, columnar sections,
trailing 64-bit checksum over everything before it. Little-endian throughout.

Snapshots load fully into memory; loading verifies magic, version, and
checksum and returns a frozen graph whose re-serialization is byte-identical.
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile

import numpy as np

from .graph import BuildReport, CitationGraph

MAGIC = b"DXG1"
VERSION = 1

_U16 = struct.Struct("<H")
_U64 = struct.Struct("<Q")


class SnapshotError(Exception):
    pass


class BadMagic(SnapshotError):
    pass


class VersionMismatch(SnapshotError):
    pass


class ChecksumMismatch(SnapshotError):
    pass


def _digest(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=8).digest()


def _blob(text: str) -> bytes:
    raw = text.encode("utf-8")
    return _U64.pack(len(raw)) + raw


def _array_bytes(a: np.ndarray, dtype: str) -> bytes:
    return np.ascontiguousarray(a, dtype=dtype).tobytes()


def serialize(g: CitationGraph) -> bytes:
    n = len(g)
    parts = [
        MAGIC,
        _U16.pack(VERSION),
        _U64.pack(n),
        _U64.pack(int(g.ref_indptr[-1])),
        _blob("\n".join(g.ids)),
        _array_bytes(g.years, "<i4"),
        _blob("\n".join(g.doc_vocab)),
        _array_bytes(g.doc_codes, "<u2"),
        _blob("\n".join(g.author_vocab)),
        _array_bytes(g.auth_indptr, "<i8"),
        _array_bytes(g.auth_idx, "<i4"),
        _array_bytes(g.field_indptr, "<i8"),
        _array_bytes(g.field_idx, "<i4"),
        _array_bytes(g.ref_indptr, "<i8"),
        _array_bytes(g.ref_idx, "<i4"),
        _array_bytes(g.cit_indptr, "<i8"),
        _array_bytes(g.cit_idx, "<i4"),
    ]
    if g.eligible is None:
        parts.append(b"\x00")
    else:
        parts.append(b"\x01")
        parts.append(_array_bytes(g.eligible, "u1"))
    payload = b"".join(parts)
    return payload + _digest(payload)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.buf):
            raise SnapshotError("truncated snapshot payload")
        out = self.buf[self.pos:self.pos + size]
        self.pos += size
        return out

    def u16(self) -> int:
        return _U16.unpack(self.take(2))[0]

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]

    def blob(self) -> str:
        size = self.u64()
        return self.take(size).decode("utf-8")

    def array(self, count: int, dtype: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        a = np.frombuffer(self.take(count * itemsize), dtype=dtype)
        return a.astype(dtype.lstrip("<"), copy=True)


def deserialize(raw: bytes) -> CitationGraph:
    if len(raw) < len(MAGIC) + 2 + 8:
        raise SnapshotError("file too short to be a snapshot")
    payload, check = raw[:-8], raw[-8:]
    if _digest(payload) != check:
        raise ChecksumMismatch("snapshot checksum does not match payload")
    r = _Reader(payload)
    if r.take(4) != MAGIC:
        raise BadMagic("not a graph snapshot (bad magic)")
    version = r.u16()
    if version != VERSION:
        raise VersionMismatch(f"snapshot version {version}, expected {VERSION}")
    n = r.u64()
    n_edges = r.u64()

    ids_blob = r.blob()
    ids = ids_blob.split("\n") if ids_blob else []
    if len(ids) != n:
        raise SnapshotError(f"id section has {len(ids)} ids, header says {n}")
    years = r.array(n, "<i4")
    doc_blob = r.blob()
    doc_vocab = tuple(doc_blob.split("\n")) if doc_blob else ()
    doc_codes = r.array(n, "<u2")
    auth_blob = r.blob()
    author_vocab = tuple(auth_blob.split("\n")) if auth_blob else ()
    auth_indptr = r.array(n + 1, "<i8")
    auth_idx = r.array(int(auth_indptr[-1]) if n else 0, "<i4")
    field_indptr = r.array(n + 1, "<i8")
    field_idx = r.array(int(field_indptr[-1]) if n else 0, "<i4")
    ref_indptr = r.array(n + 1, "<i8")
    ref_idx = r.array(int(ref_indptr[-1]) if n else 0, "<i4")
    cit_indptr = r.array(n + 1, "<i8")
    cit_idx = r.array(int(cit_indptr[-1]) if n else 0, "<i4")
    if int(ref_indptr[-1] if n else 0) != n_edges:
        raise SnapshotError("edge count in header disagrees with adjacency")
    flag = r.take(1)
    eligible = None
    if flag == b"\x01":
        eligible = r.array(n, "u1").astype(bool)
    elif flag != b"\x00":
        raise SnapshotError("bad eligibility flag byte")
    if r.pos != len(payload):
        raise SnapshotError("trailing bytes after final section")

    return CitationGraph(
        ids=ids,
        years=years,
        doc_codes=doc_codes,
        doc_vocab=doc_vocab,
        auth_indptr=auth_indptr,
        auth_idx=auth_idx,
        author_vocab=author_vocab,
        field_indptr=field_indptr,
        field_idx=field_idx,
        ref_indptr=ref_indptr,
        ref_idx=ref_idx,
        cit_indptr=cit_indptr,
        cit_idx=cit_idx,
        eligible=eligible,
        build_report=BuildReport(
            n_papers=n, n_edges_in=n_edges, n_edges=n_edges,
            n_duplicate_edges=0, n_self_loops=0, n_dangling=0,
        ),
    )


def save_snapshot(g: CitationGraph, path: str | os.PathLike) -> str:
    """Write atomically (temp file + rename); returns the checksum hex."""
    raw = serialize(g)
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".snapshot-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return raw[-8:].hex()


def load_snapshot(path: str | os.PathLike) -> CitationGraph:
    with open(path, "rb") as fh:
        raw = fh.read()
    return deserialize(raw)


def snapshot_checksum(path: str | os.PathLike) -> str:
    """Checksum recorded in a snapshot file (trailing 8 bytes), as hex."""
    with open(path, "rb") as fh:
        fh.seek(0, os.SEEK_END)
        size = fh.tell()
        if size < 8:
            raise SnapshotError("file too short to be a snapshot")
        fh.seek(-8, os.SEEK_END)
        return fh.read(8).hex()
