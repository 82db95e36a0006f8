"""File formats: matrices, signals, 8-bit PGM images, and manifests.

Text formats are line-oriented and diffable::

    PKM <rows> <cols>          PKS <length>
    v v v ... (row-major)      v v v ...

Binary variants replace the magic with ``PKMB``/``PKSB``; the header line is
followed immediately by little-endian float64 payload bytes. All loaded
values must be finite.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError


def _fail(path, reason):
    raise ParseError(f"{path}: {reason}")


def _format_values(values):
    return "\n".join(" ".join(f"{v:.17g}" for v in row) for row in values)


def save_matrix(path, matrix, binary=False):
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ParseError(f"{path}: matrix payload must be 2-D, got shape {m.shape}")
    path = Path(path)
    if binary:
        with open(path, "wb") as fh:
            fh.write(f"PKMB {m.shape[0]} {m.shape[1]}\n".encode("ascii"))
            fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())
    else:
        path.write_text(f"PKM {m.shape[0]} {m.shape[1]}\n" + _format_values(m) + "\n")


def save_signal(path, signal, binary=False):
    s = np.asarray(signal, dtype=np.float64)
    if s.ndim != 1:
        raise ParseError(f"{path}: signal payload must be 1-D, got shape {s.shape}")
    path = Path(path)
    if binary:
        with open(path, "wb") as fh:
            fh.write(f"PKSB {s.shape[0]}\n".encode("ascii"))
            fh.write(np.ascontiguousarray(s, dtype="<f8").tobytes())
    else:
        path.write_text(f"PKS {s.shape[0]}\n" + " ".join(f"{v:.17g}" for v in s) + "\n")


def _read_header(fh, path):
    line = fh.readline()
    try:
        fields = line.decode("ascii").split()
    except UnicodeDecodeError:
        _fail(path, "header is not ASCII")
    if not fields:
        _fail(path, "empty header line")
    return fields


def _parse_dims(fields, count, path):
    if len(fields) != count + 1:
        _fail(path, f"header {' '.join(fields)!r} has wrong field count")
    try:
        dims = [int(v) for v in fields[1:]]
    except ValueError:
        _fail(path, f"non-integer dimension in header {' '.join(fields)!r}")
    if any(d < 1 for d in dims):
        _fail(path, f"non-positive dimension in header {' '.join(fields)!r}")
    return dims


def _read_payload(fh, magic, total, path):
    if magic.endswith("B"):
        raw = fh.read(8 * total)
        if len(raw) != 8 * total:
            _fail(path, f"expected {8 * total} payload bytes, found {len(raw)}")
        values = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    else:
        try:
            tokens = fh.read().decode("utf-8").split()
        except UnicodeDecodeError:
            _fail(path, "text payload is not UTF-8")
        if len(tokens) != total:
            _fail(path, f"expected {total} values, found {len(tokens)}")
        try:
            values = np.array([float(t) for t in tokens], dtype=np.float64)
        except ValueError:
            _fail(path, "non-numeric value in payload")
    if not np.all(np.isfinite(values)):
        _fail(path, "payload contains non-finite values")
    return values


def load_matrix(path):
    path = Path(path)
    with open(path, "rb") as fh:
        fields = _read_header(fh, path)
        magic = fields[0]
        if magic not in ("PKM", "PKMB"):
            _fail(path, f"bad matrix magic {magic!r}")
        rows, cols = _parse_dims(fields, 2, path)
        values = _read_payload(fh, magic, rows * cols, path)
    return values.reshape(rows, cols)


def load_signal(path):
    path = Path(path)
    with open(path, "rb") as fh:
        fields = _read_header(fh, path)
        magic = fields[0]
        if magic not in ("PKS", "PKSB"):
            _fail(path, f"bad signal magic {magic!r}")
        (length,) = _parse_dims(fields, 1, path)
        values = _read_payload(fh, magic, length, path)
    return values


def _pgm_tokens(fh, path, count):
    """Next ``count`` whitespace-separated header tokens, skipping # comments."""
    tokens = []
    while len(tokens) < count:
        ch = fh.read(1)
        if not ch:
            _fail(path, "truncated header")
        if ch in b" \t\r\n":
            continue
        if ch == b"#":
            while ch not in (b"", b"\n"):
                ch = fh.read(1)
            continue
        token = ch
        while True:
            ch = fh.read(1)
            if not ch or ch in b" \t\r\n":
                break
            token += ch
        tokens.append(token)
    return tokens


def read_pgm(path):
    """Read a binary (P5) 8-bit PGM into floats scaled to [0, 1]."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
        if magic != b"P5":
            _fail(path, f"not a binary PGM (magic {magic!r})")
        try:
            width, height, maxval = (int(t) for t in _pgm_tokens(fh, path, 3))
        except ValueError:
            _fail(path, "non-integer PGM header field")
        if width < 1 or height < 1:
            _fail(path, f"bad PGM dimensions {width}x{height}")
        if not (0 < maxval <= 255):
            _fail(path, f"only 8-bit PGM supported, maxval {maxval}")
        raw = fh.read(width * height)
        if len(raw) != width * height:
            _fail(path, f"expected {width * height} raster bytes, found {len(raw)}")
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    return pixels.astype(np.float64) / maxval


def save_pgm(path, image):
    """Write floats in [0, 1] as a binary 8-bit PGM."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ParseError(f"{path}: image payload must be 2-D, got shape {img.shape}")
    data = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def load_manifest(path):
    """Read ``id<TAB>path`` lines; paths resolve relative to the manifest."""
    path = Path(path)
    base = path.parent
    entries = []
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError:
        _fail(path, "manifest is not UTF-8")
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            _fail(path, f"line {ln}: expected 'id<TAB>path'")
        entry_path = Path(parts[1])
        if not entry_path.is_absolute():
            entry_path = base / entry_path
        entries.append((parts[0], entry_path))
    return entries
