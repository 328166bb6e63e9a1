"""Small dense complex linear algebra.

Matrices are plain ``numpy`` arrays.  Multipartite operators use row-major
subsystem ordering ``A (x) B (x) M``, left to right, matching ket order.
"""

from __future__ import annotations

from collections.abc import Sequence

import math

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-12

_JACOBI_MAX_SWEEPS = 60
_SMALL_N = 20
_EPS = float(np.finfo(float).eps)
_TINY = 1e-300


class NotHermitianError(ValueError):
    pass


class NotPositiveError(ValueError):
    pass


def kron(*factors: np.ndarray) -> np.ndarray:
    """Tensor product of any number of matrices or vectors."""
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(h), initial=0.0)))


def _require_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise NotHermitianError("matrix is not Hermitian within %g" % HERMITIAN_TOL)
    return h


def _check_dims(n: int, dims: Sequence[int], index: int) -> None:
    if int(np.prod(dims)) != n:
        raise ValueError(f"subsystem dims {list(dims)} do not match size {n}")
    if not 0 <= index < len(dims):
        raise IndexError(f"subsystem index {index} out of range for dims {list(dims)}")


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: int | Sequence[int]) -> np.ndarray:
    """Trace out every subsystem except those listed in ``keep``."""
    rho = np.asarray(rho, dtype=complex)
    keep_set = [keep] if isinstance(keep, (int, np.integer)) else list(keep)
    for k in keep_set:
        _check_dims(rho.shape[0], dims, k)
    n = len(dims)
    t = rho.reshape(tuple(dims) * 2)
    traced = [i for i in range(n) if i not in keep_set]
    # einsum letters: row index i, column index n+i; traced ones share a letter
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    for i in traced:
        letters[n + i] = letters[i]
    kept = sorted(keep_set)
    out_sub = "".join(letters[i] for i in kept) + "".join(letters[n + i] for i in kept)
    red = np.einsum("".join(letters) + "->" + out_sub, t)
    d = int(np.prod([dims[i] for i in kept]))
    return red.reshape(d, d)


def partial_transpose(rho: np.ndarray, dims: Sequence[int], subsystem: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    _check_dims(rho.shape[0], dims, subsystem)
    n = len(dims)
    t = rho.reshape(tuple(dims) * 2)
    t = np.swapaxes(t, subsystem, n + subsystem)
    return t.reshape(rho.shape)


def _jacobi(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each rotation first removes the phase of ``a[p, q]`` and then applies the
    real symmetric 2x2 rotation, i.e. ``V = diag(1, conj(ph)) @ [[c, s], [-s, c]]``.
    """
    n = h.shape[0]
    scale = float(np.sum(np.abs(h) ** 2))
    if n == 1 or scale == 0.0:
        return h.diagonal().real.copy(), np.eye(n, dtype=complex)
    target = _EPS**2 * scale
    if n <= _SMALL_N:
        return _jacobi_lists(h, target)
    a = h.copy()
    v = np.eye(n, dtype=complex)
    upper = np.triu_indices(n, 1)
    for _ in range(_JACOBI_MAX_SWEEPS):
        if 2.0 * np.sum(np.abs(a[upper]) ** 2) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = complex(a[p, q])
                r = abs(apq)
                if r <= _TINY:
                    continue
                c, s, sp, cp = _rotation(apq / r, r, a[p, p].real, a[q, q].real)
                colp, colq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * colp - sp.conjugate() * colq
                a[:, q] = s * colp + cp.conjugate() * colq
                rowp, rowq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rowp - sp * rowq
                a[q, :] = s * rowp + cp * rowq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - sp.conjugate() * vq
                v[:, q] = s * vp + cp.conjugate() * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return a.diagonal().real.copy(), v


def _rotation(phase: complex, r: float, app: float, aqq: float) -> tuple[float, float, complex, complex]:
    ang = 0.5 * math.atan2(2.0 * r, aqq - app)
    c, s = math.cos(ang), math.sin(ang)
    return c, s, s * phase, c * phase


def _jacobi_lists(h: np.ndarray, target: float) -> tuple[np.ndarray, np.ndarray]:
    # Same sweep as above on Python lists; numpy call overhead dominates below ~16x16.
    n = h.shape[0]
    a = [[complex(x) for x in row] for row in h]
    v = [[complex(i == j) for j in range(n)] for i in range(n)]
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    for _ in range(_JACOBI_MAX_SWEEPS):
        if 2.0 * sum(abs(a[p][q]) ** 2 for p, q in pairs) <= target:
            break
        for p, q in pairs:
            rp, rq = a[p], a[q]
            apq = rp[q]
            r = abs(apq)
            if r <= _TINY:
                continue
            c, s, sp, cp = _rotation(apq / r, r, rp[p].real, rq[q].real)
            spc, cpc = sp.conjugate(), cp.conjugate()
            for row in a:
                x, y = row[p], row[q]
                row[p] = c * x - spc * y
                row[q] = s * x + cpc * y
            for k in range(n):
                x, y = rp[k], rq[k]
                rp[k] = c * x - sp * y
                rq[k] = s * x + cp * y
            rp[q] = rq[p] = 0j
            rp[p] = complex(rp[p].real)
            rq[q] = complex(rq[q].real)
            for row in v:
                x, y = row[p], row[q]
                row[p] = c * x - spc * y
                row[q] = s * x + cpc * y
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.array([a[i][i].real for i in range(n)]), np.array(v, dtype=complex)


def eig_hermitian(h: np.ndarray, method: str = "jacobi") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching eigenvector columns of ``h``.

    ``method="jacobi"`` runs the in-house cyclic Jacobi solver; ``"lapack"``
    defers to ``numpy.linalg.eigh`` and is meant for hot loops on larger
    generators.
    """
    h = _require_hermitian(h)
    if method == "jacobi":
        w, v = _jacobi(h)
    elif method == "lapack":
        w, v = np.linalg.eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def sqrtm_psd(rho: np.ndarray, method: str = "jacobi") -> np.ndarray:
    w, v = eig_hermitian(rho, method=method)
    if w.size and w.min() < -PSD_TOL:
        raise NotPositiveError(f"eigenvalue {w.min():.3e} below -{PSD_TOL:g}")
    root = np.sqrt(np.clip(w, 0.0, None))
    out = (v * root) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def expm_skew(h: np.ndarray, method: str = "jacobi") -> np.ndarray:
    """Return ``exp(i h)`` for Hermitian ``h``; the result is unitary."""
    w, v = eig_hermitian(h, method=method)
    return (v * np.exp(1j * w)) @ v.conj().T


def singular_values(a: np.ndarray, method: str = "jacobi") -> np.ndarray:
    """Singular values of a square matrix, descending.

    Taken from the Hermitian dilation ``[[0, a], [a^H, 0]]`` whose spectrum is
    ``+/- s_i``.  This keeps absolute accuracy near zero, which squaring and
    re-rooting ``a a^H`` would lose.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    dil = np.zeros((2 * n, 2 * n), dtype=complex)
    dil[:n, n:] = a
    dil[n:, :n] = a.conj().T
    w, _ = eig_hermitian(dil, method=method)
    return np.clip(w[:n], 0.0, None)
