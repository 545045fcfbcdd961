"""NumPy fallback for the hot grid kernels.

Computes, in one pass over a midpoint grid, the per-bucket sums that the
band integrals are assembled from.  Buckets are defined by the sorted
threshold grid ``a_grid``: bucket(s) = #{j : a_grid[j] <= s}, so strict
band membership |sigma| < a is exact.  Works for arbitrary vectorized field
callables; the compiled twin covers the corpus fields only.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteSampleError

BACKEND = "numpy"

_CHUNK_POINTS = 1 << 21


def band_sums(sigma, grad, center, half_side, cells, a_grid, weight_fns):
    """Bucketed midpoint sums over the cells^n grid on the cube.

    Returns (G1, W2, AX):
      G1[b]     = sum of ||grad|| * cellvol over points in bucket b
      W2[w, b]  = sum of ||grad|| * f_w(|sigma|) * cellvol, buckets b >= 1 only
      AX[b]     = sum of sum_i |grad_i| * cellvol
    """
    center = np.asarray(center, dtype=float)
    n = center.shape[0]
    a_grid = np.asarray(a_grid, dtype=float)
    if a_grid.ndim != 1 or a_grid.size == 0 or np.any(np.diff(a_grid) <= 0):
        raise ValueError("a_grid must be a nonempty strictly increasing 1-D array")
    m = a_grid.size
    nw = len(weight_fns)

    step = 2.0 * half_side / cells
    axes = [center[j] - half_side + (np.arange(cells) + 0.5) * step for j in range(n)]
    cell_vol = step ** n

    G1 = np.zeros(m + 1)
    W2 = np.zeros((nw, m + 1))
    AX = np.zeros(m + 1)

    per_slab = cells ** (n - 1)
    block = max(1, _CHUNK_POINTS // max(per_slab, 1))
    for i0 in range(0, cells, block):
        if n == 1:
            pts = axes[0][i0:i0 + block, None]
        else:
            mesh = np.meshgrid(axes[0][i0:i0 + block], *axes[1:], indexing="ij")
            pts = np.stack([mm.ravel() for mm in mesh], axis=-1)
        s = np.abs(np.asarray(sigma(pts), dtype=float)).ravel()
        gv = np.asarray(grad(pts), dtype=float).reshape(-1, n)
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(gv))):
            bad = ~(np.isfinite(s) & np.all(np.isfinite(gv), axis=1))
            i = int(np.argmax(bad))
            raise NonFiniteSampleError(pts.reshape(-1, n)[i].tolist(), float(s[i]))
        g = np.sqrt(np.sum(gv * gv, axis=1))
        ax = np.sum(np.abs(gv), axis=1)

        b = np.searchsorted(a_grid, s, side="right")
        G1 += np.bincount(b, weights=g, minlength=m + 1)
        AX += np.bincount(b, weights=ax, minlength=m + 1)
        out = b >= 1
        if np.any(out):
            bm, sm, gm = b[out], s[out], g[out]
            for iw, f in enumerate(weight_fns):
                fw = np.asarray(f(sm), dtype=float)
                if not np.all(np.isfinite(fw)):
                    i = int(np.argmax(~np.isfinite(fw)))
                    raise NonFiniteSampleError([float(sm[i])], float(fw[i]))
                W2[iw] += np.bincount(bm, weights=gm * fw, minlength=m + 1)

    return G1 * cell_vol, W2 * cell_vol, AX * cell_vol
