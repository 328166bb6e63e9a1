"""Entanglement measures for two-party states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import eig_hermitian, partial_transpose, singular_values, sqrtm_psd
from .states import SIGMA_YY, BlochDirection, DensityMatrix, PureState, product, tilde_two_qubit


@dataclass(frozen=True)
class ConcurrenceReport:
    lambdas: tuple[float, float, float, float]
    concurrence: float


def _as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    return DensityMatrix(np.asarray(rho, dtype=complex), (2, 2))


def concurrence_mixed(rho) -> ConcurrenceReport:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are the eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))``.
    That operator is ``sqrt(A A^H)`` with ``A = sqrt(rho) YY sqrt(rho)*``, so
    the ``l_i`` are the singular values of ``A``; they are read off a Hermitian
    dilation to avoid square-rooting rounding noise.
    """
    rho = _as_density(rho)
    if rho.dims != (2, 2):
        raise ValueError("concurrence needs a two-qubit state")
    root = sqrtm_psd(rho.matrix)
    lam = singular_values(root @ SIGMA_YY @ root.conj())
    l1, l2, l3, l4 = (float(x) for x in lam)
    return ConcurrenceReport((l1, l2, l3, l4), max(0.0, l1 - l2 - l3 - l4))


def concurrence_pure(psi: PureState) -> float:
    """``|<Psi|Psi~>|`` for a two-qubit ket."""
    if psi.dims != (2, 2):
        raise ValueError("concurrence needs a two-qubit state")
    return abs(psi.inner(tilde_two_qubit(psi)))


def concurrence_from_angles(theta1, phi1, theta2, phi2):
    """Vectorized ``(1 - n.m) / 2`` in spherical components."""
    return 0.5 * (
        1.0
        - np.cos(theta1) * np.cos(theta2)
        - np.sin(theta1) * np.sin(theta2) * np.cos(np.subtract(phi1, phi2))
    )


def concurrence_bloch(n: BlochDirection, m: BlochDirection) -> float:
    """Concurrence of the intertwined pair of spin states along ``n`` and ``m``."""
    return float(concurrence_from_angles(n.theta, n.phi, m.theta, m.phi))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def i_concurrence(psi: PureState, side: int = 0) -> float:
    """``sqrt(2 (1 - tr rho_side^2))`` for a bipartite pure state.

    Normalized so that a maximally entangled qubit pair scores 1.
    """
    if len(psi.dims) != 2:
        raise ValueError("I-concurrence needs a bipartite state")
    red = psi.density().partial_trace(side).matrix
    return math.sqrt(max(0.0, 2.0 * (1.0 - purity(red))))


def ppt_min_eigenvalue(rho, subsystem: int = 0) -> float:
    """Smallest eigenvalue of the partial transpose; negative means entangled."""
    if isinstance(rho, PureState):
        rho = rho.density()
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(np.asarray(rho, dtype=complex), (2, 2))
    if len(rho.dims) != 2:
        raise ValueError("partial transpose needs a bipartite state")
    w, _ = eig_hermitian(partial_transpose(rho.matrix, rho.dims, subsystem))
    return float(w[-1])


def overlap_with_symmetric(psi: PureState, phi: PureState) -> float:
    """``|<Psi_out|Psi_sym>|^2`` with ``Psi_out = (psi phi + i phi psi)/sqrt2``."""
    if psi.dims != phi.dims or len(psi.dims) != 1:
        raise ValueError("need two single-party states of equal dimension")
    pf = product(psi, phi).amplitudes
    fp = product(phi, psi).amplitudes
    out = (pf + 1j * fp) / math.sqrt(2.0)
    sym = pf + fp
    sym = sym / np.linalg.norm(sym)
    return abs(np.vdot(out, sym)) ** 2
