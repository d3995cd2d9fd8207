"""On-disk Cayley graph cache.

Format (little-endian throughout):
    magic "CAYG", version u16, n u64, degree u16, generator count u16,
    element-encoding length u32, element table (n * enc_len bytes),
    CSR offsets ((n+1) * u64), edge records (neighbor u64 + label u16),
    label names block (u16 count, then u16-length-prefixed utf-8 names),
    trailing CRC32 over everything after the magic.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from pathlib import Path

import numpy as np

from .cayley import CayleyGraph

MAGIC = b"CAYG"
VERSION = 1

_EDGE_DTYPE = np.dtype([("nbr", "<u8"), ("lbl", "<u2")])


class CacheFormatError(ValueError):
    pass


def serialize_graph(graph: CayleyGraph) -> bytes:
    parts = [struct.pack("<H", VERSION),
             struct.pack("<Q", graph.n),
             struct.pack("<H", graph.degree),
             struct.pack("<H", graph.gen_count),
             struct.pack("<I", graph.enc_len)]
    parts.append(b"".join(graph.element_bytes))
    parts.append(np.asarray(graph.indptr, dtype="<u8").tobytes())
    edges = np.empty(graph.nbr.size, dtype=_EDGE_DTYPE)
    edges["nbr"] = graph.nbr
    edges["lbl"] = graph.lbl
    parts.append(edges.tobytes())
    parts.append(struct.pack("<H", len(graph.edge_labels)))
    for name in graph.edge_labels:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
    desc = graph.carrier_desc.encode("utf-8")
    parts.append(struct.pack("<H", len(desc)) + desc)
    parts.append(struct.pack("<B", 1 if graph.vertex_transitive else 0))
    body = b"".join(parts)
    return MAGIC + body + struct.pack("<I", zlib.crc32(body))


def deserialize_graph(raw: bytes) -> CayleyGraph:
    if raw[:4] != MAGIC:
        raise CacheFormatError("bad magic")
    body, (crc,) = raw[4:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) != crc:
        raise CacheFormatError("CRC mismatch")
    off = 0

    def take(fmt):
        nonlocal off
        size = struct.calcsize(fmt)
        vals = struct.unpack_from(fmt, body, off)
        off += size
        return vals if len(vals) > 1 else vals[0]

    version = take("<H")
    if version != VERSION:
        raise CacheFormatError(f"unsupported version {version}")
    n = take("<Q")
    degree = take("<H")
    gen_count = take("<H")
    enc_len = take("<I")
    elements = [bytes(body[off + i * enc_len: off + (i + 1) * enc_len]) for i in range(n)]
    off += n * enc_len
    indptr = np.frombuffer(body, dtype="<u8", count=n + 1, offset=off).astype(np.int64)
    off += 8 * (n + 1)
    n_edges = int(indptr[-1])
    edges = np.frombuffer(body, dtype=_EDGE_DTYPE, count=n_edges, offset=off)
    off += _EDGE_DTYPE.itemsize * n_edges
    label_count = take("<H")
    labels = []
    for _ in range(label_count):
        ln = take("<H")
        labels.append(body[off:off + ln].decode("utf-8"))
        off += ln
    ln = take("<H")
    desc = body[off:off + ln].decode("utf-8")
    off += ln
    transitive = take("<B") == 1

    return CayleyGraph(
        n=n, enc_len=enc_len, element_bytes=elements,
        indptr=indptr,
        nbr=edges["nbr"].astype(np.int64),
        lbl=edges["lbl"].astype(np.uint16),
        edge_labels=labels, gen_count=gen_count,
        carrier_desc=desc, vertex_transitive=transitive,
        index={enc: i for i, enc in enumerate(elements)},
    )


def cache_key(carrier_desc: str, generator_encodings: list[bytes], budget: int) -> str:
    h = hashlib.sha256()
    h.update(carrier_desc.encode("utf-8"))
    for enc in generator_encodings:
        h.update(struct.pack("<I", len(enc)))
        h.update(enc)
    h.update(struct.pack("<Q", budget))
    return h.hexdigest()


class GraphCache:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, key: str) -> Path:
        return self.directory / f"{key}.cayg"

    def load(self, key: str) -> CayleyGraph | None:
        p = self.path_for(key)
        if not p.exists():
            return None
        return deserialize_graph(p.read_bytes())

    def store(self, key: str, graph: CayleyGraph) -> Path:
        p = self.path_for(key)
        p.write_bytes(serialize_graph(graph))
        return p
