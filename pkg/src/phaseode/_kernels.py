"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature.  The compiled path
is used by default; set ``PHASEODE_NUMBA=0`` in the environment (before import)
to force the numpy path, e.g. for debugging or on platforms without numba.
"""

import os

import numpy as np

_FLAG = os.environ.get("PHASEODE_NUMBA", "1").strip().lower()
USE_NUMBA = _FLAG not in ("0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    USE_NUMBA = False


def clenshaw_numpy(coeffs, x):
    """Evaluate row ``i`` of ``coeffs`` as a Chebyshev series at ``x[i]``.

    ``coeffs`` has shape (m, k) and ``x`` shape (m,), already mapped to [-1, 1].
    """
    k = coeffs.shape[1]
    b1 = np.zeros(coeffs.shape[0], dtype=np.complex128)
    b2 = np.zeros_like(b1)
    x2 = 2.0 * x
    for j in range(k - 1, 0, -1):
        b1, b2 = coeffs[:, j] + x2 * b1 - b2, b1
    return coeffs[:, 0] + x * b1 - b2


def aberth_numpy(c, z, maxit, tol):
    """Aberth-Ehrlich iteration for the monic polynomial with low coefficients ``c``.

    Returns ``(roots, iterations, converged)``.  Jacobi-style (all roots updated
    at once); the compiled twin uses Gauss-Seidel updates.
    """
    z = z.astype(np.complex128).copy()
    n = c.shape[0]
    for it in range(maxit):
        p = np.ones_like(z)
        dp = np.zeros_like(z)
        for j in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + c[j]
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            corr = ratio / (1.0 - ratio * s)
        corr = np.where(p == 0, 0.0, corr)
        if not np.all(np.isfinite(corr)):
            corr = np.where(np.isfinite(corr), corr, 1e-3 * (1.0 + np.abs(z)))
        z = z - corr
        if np.max(np.abs(corr) / (1.0 + np.abs(z))) < tol:
            return z, it + 1, True
    return z, maxit, False


def _clenshaw_loop(coeffs, x):
    m, k = coeffs.shape
    out = np.empty(m, dtype=np.complex128)
    for i in range(m):
        xi = x[i]
        b1 = 0j
        b2 = 0j
        for j in range(k - 1, 0, -1):
            tmp = coeffs[i, j] + 2.0 * xi * b1 - b2
            b2 = b1
            b1 = tmp
        out[i] = coeffs[i, 0] + xi * b1 - b2
    return out


def _aberth_loop(c, z0, maxit, tol):
    n = c.shape[0]
    z = z0.astype(np.complex128).copy()
    for it in range(maxit):
        maxcorr = 0.0
        for i in range(n):
            zi = z[i]
            p = 1.0 + 0j
            dp = 0j
            for j in range(n - 1, -1, -1):
                dp = dp * zi + p
                p = p * zi + c[j]
            if p == 0:
                continue
            s = 0j
            for j in range(n):
                if j != i:
                    s += 1.0 / (zi - z[j])
            if dp == 0:
                corr = 1e-3 * (1.0 + abs(zi))
            else:
                ratio = p / dp
                corr = ratio / (1.0 - ratio * s)
            z[i] = zi - corr
            rel = abs(corr) / (1.0 + abs(z[i]))
            if rel > maxcorr:
                maxcorr = rel
        if maxcorr < tol:
            return z, it + 1, True
    return z, maxit, False


if numba is not None:
    clenshaw_numba = numba.njit(cache=True)(_clenshaw_loop)
    aberth_numba = numba.njit(cache=True)(_aberth_loop)
else:  # pragma: no cover
    clenshaw_numba = _clenshaw_loop
    aberth_numba = _aberth_loop

if USE_NUMBA:
    clenshaw = clenshaw_numba
    aberth = aberth_numba
else:
    clenshaw = clenshaw_numpy
    aberth = aberth_numpy
