"""Independent reference implementations used to pin expected values.

Everything here deliberately avoids the production code paths: bit loops
instead of magic-mask dilation, coordinate dictionaries instead of Morton
probes, generic SVD least squares instead of Cholesky, plain Python loops
instead of vectorized numpy.
"""

import math
from collections import Counter

import numpy as np

COORD_BITS = 21
WORD = (1 << 64) - 1


def morton_encode_bitloop(x: int, y: int, z: int) -> int:
    code = 0
    for i in range(COORD_BITS):
        code |= ((z >> i) & 1) << (3 * i)
        code |= ((y >> i) & 1) << (3 * i + 1)
        code |= ((x >> i) & 1) << (3 * i + 2)
    return code


def morton_decode_bitloop(code: int):
    x = y = z = 0
    for i in range(COORD_BITS):
        z |= ((code >> (3 * i)) & 1) << i
        y |= ((code >> (3 * i + 1)) & 1) << i
        x |= ((code >> (3 * i + 2)) & 1) << i
    return x, y, z


def cartesian_offset_add(code: int, delta):
    """Decode, add the Cartesian delta, range-check, re-encode."""
    x, y, z = morton_decode_bitloop(code)
    tx, ty, tz = x + delta[0], y + delta[1], z + delta[2]
    limit = 1 << COORD_BITS
    if not (0 <= tx < limit and 0 <= ty < limit and 0 <= tz < limit):
        return None
    return morton_encode_bitloop(tx, ty, tz)


def knn_dict(positions, attrs, deltas):
    """Neighbor rows by coordinate-tuple lookup; no Morton math anywhere."""
    n = len(positions)
    table = {tuple(map(int, p)): i for i, p in enumerate(positions)}
    limit = 1 << COORD_BITS
    values = np.empty((3, n, 1 + len(deltas)), dtype=np.float64)
    occupied = np.zeros((n, len(deltas)), dtype=bool)
    attrs = np.asarray(attrs, dtype=np.float64)
    for i, p in enumerate(positions):
        values[:, i, 0] = attrs[i]
        for j, d in enumerate(deltas):
            t = (int(p[0]) + d[0], int(p[1]) + d[1], int(p[2]) + d[2])
            serial = None
            if all(0 <= v < limit for v in t):
                serial = table.get(t)
            if serial is None:
                values[:, i, j + 1] = attrs[i]
            else:
                occupied[i, j] = True
                values[:, i, j + 1] = attrs[serial]
    return values, occupied


def ridge_lstsq(rows, target, ridge_scale=1e-6):
    """Ridge least squares via an augmented SVD solve."""
    rows = np.asarray(rows, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    k = rows.shape[1]
    eps = ridge_scale * float(np.trace(rows.T @ rows)) / k
    augmented = np.vstack([rows, math.sqrt(eps) * np.eye(k)])
    stacked = np.concatenate([target, np.zeros(k)])
    return np.linalg.lstsq(augmented, stacked, rcond=None)[0]


def naive_normal_equation(rows, target):
    """Row-by-row outer-product accumulation."""
    rows = np.asarray(rows, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    k = rows.shape[1]
    gram = np.zeros((k, k))
    cross = np.zeros(k)
    for row, value in zip(rows, target):
        gram += np.outer(row, row)
        cross += row * value
    return gram, cross


def naive_dot_rows(rows, taps):
    return np.array([sum(r * t for r, t in zip(row, taps)) for row in rows])


def naive_mse(x, y):
    total = 0.0
    for a, b in zip(x, y):
        total += (float(a) - float(b)) ** 2
    return total / len(x)


def two_pass_variance(row):
    mu = sum(float(v) for v in row) / len(row)
    return sum((float(v) - mu) ** 2 for v in row) / len(row)


def bt709_full_range(r, g, b):
    kr, kb = 0.2126, 0.0722
    y = kr * r + (1 - kr - kb) * g + kb * b
    cb = (b - y) / (2 * (1 - kb)) + 128
    cr = (r - y) / (2 * (1 - kr)) + 128
    def q(v):
        return int(min(255, max(0, math.floor(abs(v) + 0.5) * (1 if v >= 0 else -1))))
    return q(y), q(cb), q(cr)


def entropy_bits_counter(symbols):
    symbols = list(symbols)
    counts = Counter(symbols)
    n = len(symbols)
    return sum(-c * math.log2(c / n) for c in counts.values())


def psnr_loop(x, y, peak=255.0):
    total = 0.0
    for a, b in zip(x, y):
        total += (float(a) - float(b)) ** 2
    if total == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak * len(x) / total)


def bd_rate_polyfit(anchor, test):
    """Classic cubic Bjontegaard via numpy.polyfit/polyint."""
    qa = np.array([p.psnr for p in anchor])
    ra = np.log10([p.bpop for p in anchor])
    qt = np.array([p.psnr for p in test])
    rt = np.log10([p.bpop for p in test])
    pa = np.polyfit(qa, ra, 3)
    pt = np.polyfit(qt, rt, 3)
    lo = max(qa.min(), qt.min())
    hi = min(qa.max(), qt.max())
    ia = np.polyval(np.polyint(pa), hi) - np.polyval(np.polyint(pa), lo)
    it = np.polyval(np.polyint(pt), hi) - np.polyval(np.polyint(pt), lo)
    avg = (it - ia) / (hi - lo)
    return (10.0 ** avg - 1.0) * 100.0


def paired_covariance(a, b):
    la = len(a)
    lb = len(b)
    length = min(la, lb)
    mu_a = sum(a) / la
    mu_b = sum(b) / lb
    return sum((a[i] - mu_a) * (b[i] - mu_b) for i in range(length)) / length


def bucket_by_shift(positions, shift):
    buckets = {}
    for i, p in enumerate(positions):
        key = (int(p[0]) >> shift, int(p[1]) >> shift, int(p[2]) >> shift)
        buckets.setdefault(key, []).append(i)
    return buckets
