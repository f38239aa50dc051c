"""Pure-Python reference implementations of the hot loops.

The compiled module ``_kernels`` mirrors these signatures exactly; the
selector in :mod:`stabpath.kernels` picks one at import time.
"""
import math

TWO_PI = 2.0 * math.pi


def wrap_angle(x):
    """Reduce an angle into ``(-pi, pi]``."""
    y = math.fmod(x + math.pi, TWO_PI)
    if y <= 0.0:
        y += TWO_PI
    return y - math.pi


def unwrap_increments(arg_w, arg_mid, d_im_s, out):
    """Fill ``out[j]`` with the phase increment (radians) between samples j and j+1.

    The wrapped increment of ``arg_w`` is compared with the two-step increment
    through the midpoint sample; disagreement means the grid is too coarse.
    Returns the first offending index, or -1.
    """
    n = len(arg_w)
    for j in range(n - 1):
        d = wrap_angle(arg_w[j + 1] - arg_w[j])
        d2 = wrap_angle(arg_mid[j] - arg_w[j]) + wrap_angle(arg_w[j + 1] - arg_mid[j])
        if abs(d - d2) > 1e-9 or abs(d) >= math.pi * (1.0 - 1e-12):
            return j
        out[j] = d_im_s[j] + d
    return -1


def shift_gap(psi_i, psi_j, r, eps):
    """``max b - min a`` over families of two twisted blocks.

    ``a`` ranges over integers with ``psi_i + a`` in ``(-eps-r, 1+r]`` and
    ``b`` over integers with ``psi_j + b`` in ``(-r, 1+eps+r)``.  ``eps == 0``
    is the limit ``eps -> 0+``, where both windows become ``[-r, 1+r]``.
    """
    min_a = None
    for p in psi_i:
        if eps > 0.0:
            a = math.floor(-eps - r - p) + 1
        else:
            a = math.ceil(-r - p)
        if min_a is None or a < min_a:
            min_a = a
    max_b = None
    for p in psi_j:
        if eps > 0.0:
            b = math.ceil(1.0 + eps + r - p) - 1
        else:
            b = math.floor(1.0 + r - p)
        if max_b is None or b > max_b:
            max_b = b
    return max_b - min_a


def slice_distance(pa, pb, max_shift):
    """Sup of phase-extremum differences over singles and pairwise sums.

    Sums ``F[s] + G[u]`` only depend on ``s - u``, which ranges over
    ``[-2*max_shift, 2*max_shift]``.
    """
    n = len(pa)
    best = 0.0
    for k in range(n):
        d = abs(pa[k] - pb[k])
        if d > best:
            best = d
    for k in range(n):
        for l in range(k + 1, n):
            for delta in range(-2 * max_shift, 2 * max_shift + 1):
                a1 = pa[k] + delta
                b1 = pb[k] + delta
                hi_a = a1 if a1 > pa[l] else pa[l]
                hi_b = b1 if b1 > pb[l] else pb[l]
                lo_a = pa[l] if a1 > pa[l] else a1
                lo_b = pb[l] if b1 > pb[l] else b1
                d = abs(hi_a - hi_b)
                if d > best:
                    best = d
                d = abs(lo_a - lo_b)
                if d > best:
                    best = d
    return best
