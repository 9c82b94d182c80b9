import hashlib

import numpy as np

# Fixed byte layout so digests are stable across platforms
_FLOAT = "<f8"
_INT = "<i8"


def compute_array_hash(*arrays: np.ndarray) -> str:
    """SHA-256 over the little-endian bytes of each array, shape included."""
    digest = hashlib.sha256()
    for arr in arrays:
        arr = np.asarray(arr)
        dtype = _FLOAT if arr.dtype.kind == "f" else _INT
        digest.update(str(arr.shape).encode())
        digest.update(np.ascontiguousarray(arr, dtype=dtype).tobytes())
    return digest.hexdigest()


def compute_mesh_id(vertices: np.ndarray, faces: np.ndarray) -> str:
    """
    Identity of a shape model: hash of vertex coordinates and face indices.
    Two files that parse to the same arrays get the same id.
    """
    return compute_array_hash(vertices, faces)


def compute_text_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def short_id(digest: str, length: int = 12) -> str:
    return digest[:length]
