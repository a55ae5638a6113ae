"""Super-segmentation and the lossless compressed archive format (.bbx).

Projected impacts can only break faces that are faults of at least one
mode, so the union of all mode faults induces the finest partition any
pattern can realize. Storing the tet mesh, that atomic partition, and one
small atomic-piece -> output-piece mapping per pattern replaces hundreds
of exploded meshes; decoding pastes atomic pieces back together.

The byte format is documented field by field in docs/FORMAT.md. Little
endian throughout; vertices are raw 64-bit floats for bit-exactness;
integer arrays are zigzag-delta varint packed; every section carries a
CRC32.
"""

import json
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .fracture import FracturePattern, labels_from_broken
from .geom import TetMesh

MAGIC = b"BBXA"
VERSION = 1

_SEC_TETMESH = 1
_SEC_SUPERSEG = 2
_SEC_MODES = 3
_SEC_PATTERNS = 4


class ArchiveError(ValueError):
    """Malformed, truncated, or corrupt archive."""


class RefinementError(ValueError):
    """A pattern breaks a face that no mode fault opened (threshold mismatch)."""


@dataclass
class SuperSegmentation:
    atomic_labels: np.ndarray   # per-tet atomic piece id
    atomic_count: int
    broken_face_union: np.ndarray  # sorted interior-face ids


def super_segmentation(mesh, adjacency, fmodes, fault_eps=1e-3):
    """Atomic pieces: connected components after removing the union of all
    per-mode fault faces at fault_eps."""
    if fmodes is None or fmodes.k == 0:
        broken = np.zeros(adjacency.n_faces, dtype=bool)
    else:
        broken = (fmodes.jump_norms > fault_eps).any(axis=1)
    count, labels = labels_from_broken(mesh.m, adjacency, broken)
    return SuperSegmentation(
        atomic_labels=labels,
        atomic_count=count,
        broken_face_union=np.flatnonzero(broken),
    )


def pattern_to_atomic_map(superseg, pattern):
    """Mapping atomic-piece-id -> output-piece-id; raises RefinementError
    when a pattern piece splits an atomic piece."""
    mapping = np.full(superseg.atomic_count, -1, dtype=np.int64)
    atoms = superseg.atomic_labels
    labels = pattern.labels
    order = np.argsort(atoms, kind="stable")
    sorted_atoms = atoms[order]
    sorted_labels = labels[order]
    starts = np.flatnonzero(np.r_[True, sorted_atoms[1:] != sorted_atoms[:-1]])
    bounds = np.r_[starts, len(order)]
    for s, e in zip(bounds[:-1], bounds[1:]):
        group = sorted_labels[s:e]
        if (group != group[0]).any():
            raise RefinementError(
                f"pattern splits atomic piece {int(sorted_atoms[s])}; "
                "was it extracted with a threshold below the fault epsilon?"
            )
        mapping[sorted_atoms[s]] = group[0]
    return mapping


# -- varint / zigzag ---------------------------------------------------------

def _zigzag(values):
    v = np.asarray(values, dtype=np.int64)
    return ((v << 1) ^ (v >> 63)).astype(np.uint64)


def _unzigzag(values):
    v = np.asarray(values, dtype=np.uint64)
    return ((v >> np.uint64(1)).astype(np.int64)) ^ -((v & np.uint64(1)).astype(np.int64))


def pack_int_array(values):
    """Zigzag-delta varint encoding of an integer array."""
    v = np.asarray(values, dtype=np.int64)
    deltas = np.diff(v, prepend=np.int64(0))
    out = bytearray()
    for z in _zigzag(deltas):
        z = int(z)
        while True:
            byte = z & 0x7F
            z >>= 7
            if z:
                out.append(byte | 0x80)
            else:
                out.append(byte)
                break
    return bytes(out)


def unpack_int_array(buf, count):
    """Inverse of pack_int_array; returns (array, bytes consumed)."""
    zz = np.empty(count, dtype=np.uint64)
    pos = 0
    for i in range(count):
        shift = 0
        acc = 0
        while True:
            if pos >= len(buf):
                raise ArchiveError("truncated varint stream")
            byte = buf[pos]
            pos += 1
            acc |= (byte & 0x7F) << shift
            if not byte & 0x80:
                break
            shift += 7
        zz[i] = acc & 0xFFFFFFFFFFFFFFFF
    return np.cumsum(_unzigzag(zz)), pos


# -- section framing ---------------------------------------------------------

def _write_section(fh, sec_id, payload):
    fh.write(struct.pack("<BQ", sec_id, len(payload)))
    fh.write(payload)
    fh.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


def _read_sections(data):
    pos = 0
    while pos < len(data):
        if pos + 9 > len(data):
            raise ArchiveError("truncated section header")
        sec_id, length = struct.unpack_from("<BQ", data, pos)
        pos += 9
        if pos + length + 4 > len(data):
            raise ArchiveError("truncated section payload")
        payload = data[pos : pos + length]
        pos += length
        (crc,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if zlib.crc32(payload) & 0xFFFFFFFF != crc:
            raise ArchiveError(f"checksum failure in section {sec_id}")
        yield sec_id, payload


def encode(mesh, superseg, fmodes, patterns, path, include_modes=False):
    """Write a .bbx archive. Every pattern must refine into atomic pieces."""
    mappings = [pattern_to_atomic_map(superseg, p) for p in patterns]

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))

        tets_packed = pack_int_array(mesh.tets.reshape(-1))
        payload = struct.pack("<QQ", mesh.n, mesh.m)
        payload += mesh.vertices.astype("<f8").tobytes()
        payload += tets_packed
        _write_section(fh, _SEC_TETMESH, payload)

        payload = struct.pack("<QQ", superseg.atomic_count, len(superseg.broken_face_union))
        payload += pack_int_array(superseg.atomic_labels)
        payload += pack_int_array(superseg.broken_face_union)
        _write_section(fh, _SEC_SUPERSEG, payload)

        if include_modes and fmodes is not None:
            payload = struct.pack("<Qd", fmodes.k, fmodes.omega)
            payload += fmodes.vectors.astype("<f8").tobytes()
            _write_section(fh, _SEC_MODES, payload)

        chunks = [struct.pack("<Q", len(patterns))]
        for pat, mapping in zip(patterns, mappings):
            meta = json.dumps(pat.provenance, sort_keys=True, separators=(",", ":")).encode()
            chunks.append(struct.pack("<dQI", pat.tau, pat.piece_count, len(meta)))
            chunks.append(meta)
            chunks.append(pack_int_array(mapping))
        _write_section(fh, _SEC_PATTERNS, b"".join(chunks))


@dataclass
class DecodedArchive:
    mesh: TetMesh
    superseg: SuperSegmentation
    patterns: list            # FracturePattern with reconstructed labels
    modes_matrix: np.ndarray  # (12m, k) or None
    modes_omega: float


def decode(path):
    """Read a .bbx archive and reconstruct per-tet labels for every pattern."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ArchiveError("bad magic; not a .bbx archive")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise ArchiveError(f"unsupported archive version {version}")

    mesh = None
    superseg = None
    patterns = None
    modes_matrix = None
    modes_omega = float("nan")
    for sec_id, payload in _read_sections(data[8:]):
        if sec_id != _SEC_TETMESH and mesh is None:
            raise ArchiveError("tet-mesh section must come first")
        if sec_id == _SEC_TETMESH:
            n, m = struct.unpack_from("<QQ", payload, 0)
            off = 16
            verts = np.frombuffer(payload, dtype="<f8", count=3 * n, offset=off).reshape(n, 3)
            off += 24 * n
            tets_flat, used = unpack_int_array(payload[off:], 4 * m)
            mesh = TetMesh(verts.copy(), tets_flat.reshape(m, 4))
        elif sec_id == _SEC_SUPERSEG:
            count, n_broken = struct.unpack_from("<QQ", payload, 0)
            labels, used = unpack_int_array(payload[16:], mesh.m)
            broken, _ = unpack_int_array(payload[16 + used :], n_broken)
            superseg = SuperSegmentation(labels, int(count), broken)
        elif sec_id == _SEC_MODES:
            k, modes_omega = struct.unpack_from("<Qd", payload, 0)
            modes_matrix = np.frombuffer(
                payload, dtype="<f8", count=12 * mesh.m * k, offset=16
            ).reshape(12 * mesh.m, k).copy()
        elif sec_id == _SEC_PATTERNS:
            (n_pat,) = struct.unpack_from("<Q", payload, 0)
            off = 8
            patterns = []
            for _ in range(n_pat):
                tau, piece_count, meta_len = struct.unpack_from("<dQI", payload, off)
                off += 20
                meta = json.loads(payload[off : off + meta_len].decode())
                off += meta_len
                mapping, used = unpack_int_array(payload[off:], superseg.atomic_count)
                off += used
                patterns.append(
                    FracturePattern(
                        labels=mapping[superseg.atomic_labels],
                        piece_count=int(piece_count),
                        tau=tau,
                        provenance=meta,
                    )
                )
        else:
            raise ArchiveError(f"unknown section id {sec_id}")
    if mesh is None or superseg is None or patterns is None:
        raise ArchiveError("archive is missing a required section")
    return DecodedArchive(
        mesh=mesh,
        superseg=superseg,
        patterns=patterns,
        modes_matrix=modes_matrix,
        modes_omega=modes_omega,
    )
