"""Slow reference implementations used only by the tests.

Each oracle follows the textbook definition directly and shares no code
path with the package.
"""

import struct
import zlib
from itertools import product

import mpmath
import numpy as np


def naive_kappa(m1, m2):
    x = np.asarray(m1, dtype=bool).ravel().tolist()
    y = np.asarray(m2, dtype=bool).ravel().tolist()
    a = b = c = d = 0
    for u, v in zip(x, y):
        if u and v:
            a += 1
        elif u:
            b += 1
        elif v:
            c += 1
        else:
            d += 1
    n = float(a + b + c + d)
    p_o = (a + d) / n
    p_yes = ((a + b) / n) * ((a + c) / n)
    p_no = ((c + d) / n) * ((b + d) / n)
    p_e = p_yes + p_no
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def _shifted_stack(cells, side):
    # every footprint offset of a background-padded copy
    r = side // 2
    h, w = cells.shape
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    padded[r : r + h, r : r + w] = cells
    for dy, dx in product(range(side), repeat=2):
        yield padded[dy : dy + h, dx : dx + w]


def naive_erode(cells, side):
    cells = np.asarray(cells, dtype=bool)
    out = np.ones(cells.shape, dtype=bool)
    for view in _shifted_stack(cells, side):
        out &= view
    return out


def naive_dilate(cells, side):
    cells = np.asarray(cells, dtype=bool)
    out = np.zeros(cells.shape, dtype=bool)
    for view in _shifted_stack(cells, side):
        out |= view
    return out


def naive_open(cells, side):
    return naive_dilate(naive_erode(cells, side), side)


def naive_close(cells, side):
    # evaluated on a plane with a background margin wide enough to hold the dilation
    cells = np.asarray(cells, dtype=bool)
    m = side
    big = np.pad(cells, m)
    closed = naive_erode(naive_dilate(big, side), side)
    return closed[m:-m, m:-m]


def naive_window_erode(cells, side):
    """Pixel-by-pixel sliding window, for small hand-checked cases."""
    cells = np.asarray(cells, dtype=bool)
    h, w = cells.shape
    r = side // 2
    out = np.zeros_like(cells)
    for i in range(h):
        for j in range(w):
            ok = True
            for di in range(-r, r + 1):
                for dj in range(-r, r + 1):
                    y, x = i + di, j + dj
                    if not (0 <= y < h and 0 <= x < w and cells[y, x]):
                        ok = False
            out[i, j] = ok
    return out


def halfplane_hull(cells):
    """Pixel centers inside the convex hull of the foreground centers.

    Candidate points are the top and bottom foreground pixel of each
    column. Every ordered pair (p, q) that has all candidates on its left
    (or on the line) defines a supporting half-plane; a pixel is inside
    iff it lies in all of them.
    """
    cells = np.asarray(cells, dtype=bool)
    h, w = cells.shape
    if not cells.any():
        return cells.copy()
    pts = set()
    for c in range(w):
        rows = np.flatnonzero(cells[:, c])
        if rows.size:
            pts.add((int(rows[0]), c))
            pts.add((int(rows[-1]), c))
    P = np.array(sorted(pts), dtype=np.int64)
    rr, cc = np.mgrid[0:h, 0:w]
    R, C = rr.ravel(), cc.ravel()

    if len(P) == 1:
        return ((R == P[0, 0]) & (C == P[0, 1])).reshape(h, w)

    # cross[i, j, k] = cross(P[j] - P[i], P[k] - P[i])
    d = P[None, :, :] - P[:, None, :]
    cross = d[:, :, None, 0] * d[:, None, :, 1] - d[:, :, None, 1] * d[:, None, :, 0]
    distinct = ~np.eye(len(P), dtype=bool)
    collinear = bool(np.all(cross == 0))
    if collinear:
        p0 = P[0]
        q0 = P[-1]
        on_line = (q0[0] - p0[0]) * (C - p0[1]) - (q0[1] - p0[1]) * (R - p0[0]) == 0
        inside = (
            on_line
            & (R >= P[:, 0].min()) & (R <= P[:, 0].max())
            & (C >= P[:, 1].min()) & (C <= P[:, 1].max())
        )
        return inside.reshape(h, w)

    supporting = distinct & np.all(cross >= 0, axis=2)
    inside = np.ones(R.shape, dtype=bool)
    for i, j in zip(*np.nonzero(supporting)):
        p, q = P[i], P[j]
        side = (q[0] - p[0]) * (C - p[1]) - (q[1] - p[1]) * (R - p[0])
        inside &= side >= 0
    return inside.reshape(h, w)


def naive_ks_d(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    best = 0.0
    for t in np.concatenate([a, b]):
        fa = np.count_nonzero(a <= t) / a.size
        fb = np.count_nonzero(b <= t) / b.size
        best = max(best, abs(fa - fb))
    return best


def mp_ks_pvalue(d, n1, n2, terms=400):
    """Asymptotic K-S p-value in arbitrary precision."""
    with mpmath.workdps(60):
        ne = mpmath.mpf(n1) * n2 / (n1 + n2)
        lam = (mpmath.sqrt(ne) + mpmath.mpf("0.12") + mpmath.mpf("0.11") / mpmath.sqrt(ne)) * d
        total = mpmath.mpf(0)
        for k in range(1, terms + 1):
            total += 2 * (-1) ** (k - 1) * mpmath.exp(-2 * k * k * lam * lam)
        return total


def raw_png_gray(rows, bit_depth=8):
    """Hand-assembled grayscale PNG (no external encoder)."""
    height = len(rows)
    width = len(rows[0])

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    ihdr = struct.pack(">IIBBBBB", width, height, bit_depth, 0, 0, 0, 0)
    fmt = "B" if bit_depth == 8 else ">H"
    raw = b""
    for row in rows:
        raw += b"\x00"
        for v in row:
            raw += struct.pack(fmt, v)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw))
        + chunk(b"IEND", b"")
    )


def png_pixels(data):
    """Decode an 8-bit grayscale, non-interlaced PNG by hand."""
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    pos = 8
    idat = b""
    width = height = None
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        tag = data[pos + 4 : pos + 8]
        body = data[pos + 8 : pos + 8 + length]
        if tag == b"IHDR":
            width, height, depth, ctype = struct.unpack(">IIBB", body[:10])
            assert (depth, ctype) == (8, 0)
        elif tag == b"IDAT":
            idat += body
        pos += 12 + length
    raw = zlib.decompress(idat)
    stride = width + 1
    out = np.zeros((height, width), dtype=np.int64)
    prev = [0] * width
    for y in range(height):
        ftype = raw[y * stride]
        line = list(raw[y * stride + 1 : (y + 1) * stride])
        for x in range(width):
            left = line[x - 1] if x else 0
            up = prev[x]
            ul = prev[x - 1] if x else 0
            if ftype == 1:
                line[x] = (line[x] + left) & 0xFF
            elif ftype == 2:
                line[x] = (line[x] + up) & 0xFF
            elif ftype == 3:
                line[x] = (line[x] + (left + up) // 2) & 0xFF
            elif ftype == 4:
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                pred = left if pa <= pb and pa <= pc else (up if pb <= pc else ul)
                line[x] = (line[x] + pred) & 0xFF
        out[y] = line
        prev = line
    return out
