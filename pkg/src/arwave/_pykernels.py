"""Pure numpy implementations of the trigonometric-sum kernels.

All kernels evaluate the real trigonometric sum

    f(t) = scale * sum_k (cre[k] cos(2 pi d[k] t) - cim[k] sin(2 pi d[k] t))

and share their signatures with the compiled module ``_ckernels``.
"""
import numpy as np

TWO_PI = 2.0 * np.pi

# Caps the (points x samples) block materialized at once.
_BLOCK = 1 << 22


def grid_values(freqs, cre, cim, scale, L, n_cells):
    """Values of f on ``t_i = i L / n_cells`` for each row of ``cre``/``cim``.

    ``cre`` and ``cim`` have shape ``(R, K)``; the result has shape
    ``(R, n_cells + 1)``.
    """
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    cre = np.atleast_2d(np.asarray(cre, dtype=np.float64))
    cim = np.atleast_2d(np.asarray(cim, dtype=np.float64))
    t = np.arange(n_cells + 1) * (L / n_cells)
    phase = TWO_PI * np.outer(t, freqs)
    cos_b = np.cos(phase)
    sin_b = np.sin(phase)
    R = cre.shape[0]
    out = np.empty((R, n_cells + 1))
    step = max(1, _BLOCK // max(1, n_cells + 1))
    for s in range(0, R, step):
        e = min(R, s + step)
        out[s:e] = (cos_b @ cre[s:e].T - sin_b @ cim[s:e].T).T
    out *= scale
    return out


def eval_points(freqs, cre, cim, scale, ts):
    """Return ``(f(ts), f'(ts))`` for a single coefficient vector."""
    ts = np.asarray(ts, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    phase = TWO_PI * np.multiply.outer(ts, freqs)
    c = np.cos(phase)
    s = np.sin(phase)
    f = scale * (c @ cre - s @ cim)
    w = TWO_PI * freqs
    fp = scale * (-(s @ (w * cre)) - c @ (w * cim))
    return f, fp


def bisect(freqs, cre, cim, scale, lo, hi, tol):
    """Refine every bracket ``[lo_i, hi_i]`` (sign change assumed) to width ``<= tol``."""
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    if lo.size == 0:
        return lo
    flo, _ = eval_points(freqs, cre, cim, scale, lo)
    while True:
        active = (hi - lo) > tol
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        if np.all((mid[active] == lo[active]) | (mid[active] == hi[active])):
            break
        fm, _ = eval_points(freqs, cre, cim, scale, mid[active])
        idx = np.nonzero(active)[0]
        exact = fm == 0.0
        lo[idx[exact]] = mid[idx[exact]]
        hi[idx[exact]] = mid[idx[exact]]
        left = ~exact & (np.sign(fm) == np.sign(flo[idx]))
        lo[idx[left]] = mid[idx[left]]
        flo[idx[left]] = fm[left]
        right = ~exact & ~left
        hi[idx[right]] = mid[idx[right]]
    return 0.5 * (lo + hi)
