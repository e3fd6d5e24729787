"""Vectorized quaternion kernels on arrays of shape (..., 4).

Component order is (w, x, y, z) and the quaternion (w, v) stands for the
SU(2) matrix ``w*I - i*(v . sigma)``.  The Hamilton product then matches
the matrix product.
"""
import numpy as np


def qmul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + bw * ax + ay * bz - az * by,
            aw * by + bw * ay + az * bx - ax * bz,
            aw * bz + bw * az + ax * by - ay * bx,
        ],
        axis=-1,
    )


def qconj(a):
    a = np.asarray(a, dtype=float)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qnormalize(a):
    a = np.asarray(a, dtype=float)
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def qexp(v):
    """Quaternion of ``exp(-i v . sigma)`` for rotation vectors ``v`` (..., 3)."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1)
    # sin(theta)/theta, accurate for small theta
    sinc = np.sinc(theta / np.pi)
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = np.cos(theta)
    out[..., 1:] = v * sinc[..., None]
    return out


def qidentity(n=None):
    if n is None:
        return np.array([1.0, 0.0, 0.0, 0.0])
    out = np.zeros((n, 4))
    out[:, 0] = 1.0
    return out


def qdistance(a, b):
    """Sign-aligned Euclidean distance (insensitive to the double cover)."""
    d = np.sum(a * b, axis=-1)
    sign = np.where(d < 0.0, -1.0, 1.0)
    return np.linalg.norm(a - sign[..., None] * b, axis=-1)


def qsin_angle(a, b):
    """sin of the angle between unit quaternions, computed without cancellation."""
    r = qmul(qconj(a), b)
    vec = np.linalg.norm(r[..., 1:], axis=-1)
    return vec / np.hypot(np.abs(r[..., 0]), vec)


def reduce_product(q):
    """Ordered product ``q[n-1] * ... * q[1] * q[0]`` by pairwise reduction."""
    q = np.asarray(q, dtype=float)
    if len(q) == 0:
        return qidentity()
    while len(q) > 1:
        if len(q) % 2:
            q = np.concatenate([q, qidentity(1)])
        # later factor multiplies from the left
        q = qnormalize(qmul(q[1::2], q[0::2]))
    return q[0]


def prefix_products(q):
    """Inclusive scan ``S[k] = q[k] * ... * q[0]`` in O(log n) vector passes."""
    s = np.array(q, dtype=float, copy=True)
    n = len(s)
    d = 1
    while d < n:
        s[d:] = qnormalize(qmul(s[d:], s[:-d]))
        d *= 2
    return s
