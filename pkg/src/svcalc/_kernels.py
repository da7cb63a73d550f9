"""Brute-force distance kernels over point clouds.

Every kernel has a numba-compiled version and a pure numpy version with the
same signature. The numba path is used when numba imports cleanly and the
environment variable ``SVCALC_DISABLE_NUMBA`` is unset (or ``0``); set it to
``1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

_BLOCK = 2048


def _flag_disabled() -> bool:
    return os.environ.get("SVCALC_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------


def _np_sqdist_block(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    # coordinate-by-coordinate accumulation, the same rounding as the loops below
    out = np.zeros((P.shape[0], Q.shape[0]))
    for k in range(P.shape[1]):
        d = P[:, k, None] - Q[None, :, k]
        out += d * d
    return out


def nearest_dist_numpy(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    out = np.empty(P.shape[0])
    for s in range(0, P.shape[0], _BLOCK):
        out[s : s + _BLOCK] = _np_sqdist_block(P[s : s + _BLOCK], Q).min(axis=1)
    return np.sqrt(out)


def pair_indices_numpy(A: np.ndarray, B: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    # squared-distance thresholds (dist + tol)^2, same as the numba kernel
    tA = (nearest_dist_numpy(A, B) + tol) ** 2
    tB = (nearest_dist_numpy(B, A) + tol) ** 2
    ia_parts, ib_parts = [], []
    for s in range(0, A.shape[0], _BLOCK):
        D2 = _np_sqdist_block(A[s : s + _BLOCK], B)
        i, j = np.nonzero((D2 <= tA[s : s + _BLOCK, None]) | (D2 <= tB[None, :]))
        ia_parts.append(i + s)
        ib_parts.append(j)
    return np.concatenate(ia_parts).astype(np.int64), np.concatenate(ib_parts).astype(np.int64)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True)
    def nearest_dist_numba(P, Q):
        out = np.empty(P.shape[0])
        n = P.shape[1]
        for i in range(P.shape[0]):
            best = np.inf
            for j in range(Q.shape[0]):
                s = 0.0
                for k in range(n):
                    d = P[i, k] - Q[j, k]
                    s += d * d
                if s < best:
                    best = s
            out[i] = np.sqrt(best)
        return out

    @njit(cache=True)
    def pair_indices_numba(A, B, tol):
        na, nb, n = A.shape[0], B.shape[0], A.shape[1]
        tA = np.empty(na)
        tB = np.full(nb, np.inf)
        for i in range(na):
            best = np.inf
            for j in range(nb):
                s = 0.0
                for k in range(n):
                    d = A[i, k] - B[j, k]
                    s += d * d
                if s < best:
                    best = s
                if s < tB[j]:
                    tB[j] = s
            tA[i] = (np.sqrt(best) + tol) ** 2
        for j in range(nb):
            tB[j] = (np.sqrt(tB[j]) + tol) ** 2
        counts = np.zeros(na, dtype=np.int64)
        for i in range(na):
            ti = tA[i]
            c = 0
            for j in range(nb):
                s = 0.0
                for k in range(n):
                    d = A[i, k] - B[j, k]
                    s += d * d
                c += (s <= ti) | (s <= tB[j])
            counts[i] = c
        ia = np.empty(counts.sum(), dtype=np.int64)
        ib = np.empty_like(ia)
        c = 0
        for i in range(na):
            if counts[i] == 0:
                continue
            ti = tA[i]
            for j in range(nb):
                s = 0.0
                for k in range(n):
                    d = A[i, k] - B[j, k]
                    s += d * d
                if (s <= ti) | (s <= tB[j]):
                    ia[c] = i
                    ib[c] = j
                    c += 1
        return ia, ib


def use_numba() -> bool:
    return HAVE_NUMBA and not _flag_disabled()


def nearest_dist(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Distance from each row of ``P`` to the nearest row of ``Q``."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    if use_numba():
        return nearest_dist_numba(P, Q)
    return nearest_dist_numpy(P, Q)


def pair_indices(A: np.ndarray, B: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs ``(i, j)`` where ``A[i]`` and ``B[j]`` project onto each other.

    A pair is kept when ``|A[i]-B[j]|`` is within ``tol`` of ``dist(A[i], B)``
    or of ``dist(B[j], A)``. Output is in row-major (i, then j) order.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    if use_numba():
        return pair_indices_numba(A, B, float(tol))
    return pair_indices_numpy(A, B, float(tol))
