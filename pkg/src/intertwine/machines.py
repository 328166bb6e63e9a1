"""The two-qubit entangling machine and the optimal entangler.

A machine maps ``|psi>_A |phi>_B`` to ``|psi phi> |X> + |phi psi> |Y>`` where
the machine states obey ``<X|X> = (1+xi)/2``, ``<Y|Y> = (1-xi)/2`` and
``<X|Y> = i eta``.  The closed forms below fix ``phi = |0>`` and write the
input as ``psi = a|0> + b|1>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .linalg import expm_skew, kron
from .states import DensityMatrix, PureState, product

BOUND_TOL = 1e-12

PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class MachineBoundError(ValueError):
    pass


def eta_bound(xi: float) -> float:
    return math.sqrt(max(0.0, 1.0 - xi * xi)) / 2.0


@dataclass(frozen=True)
class MachineParams:
    xi: float
    eta: float

    def __post_init__(self) -> None:
        if not -1.0 - BOUND_TOL <= self.xi <= 1.0 + BOUND_TOL:
            raise MachineBoundError(f"xi={self.xi} outside [-1, 1]")
        if abs(self.eta) > eta_bound(self.xi) + BOUND_TOL:
            raise MachineBoundError(
                f"|eta|={abs(self.eta):.6g} violates eta <= sqrt(1 - xi^2)/2 = {eta_bound(self.xi):.6g}"
            )


@dataclass(frozen=True, eq=False)
class MachineRealization:
    x: np.ndarray
    y: np.ndarray

    def gram(self) -> np.ndarray:
        m = np.stack([self.x, self.y], axis=1)
        return m.conj().T @ m


def realize_machine_states(p: MachineParams) -> MachineRealization:
    """Two-dimensional vectors X, Y with the prescribed inner products."""
    nx = (1.0 + p.xi) / 2.0
    ny = (1.0 - p.xi) / 2.0
    # Schur complement (1 - xi^2)/4 - eta^2, formed directly so it is exactly 0 on the bound
    slack = max(0.0, (1.0 - p.xi * p.xi) / 4.0 - p.eta * p.eta)
    if nx >= ny:
        x1 = math.sqrt(max(nx, 0.0))
        y1 = 1j * p.eta / x1
        y2 = math.sqrt(slack / nx)
        return MachineRealization(np.array([x1, 0.0], dtype=complex), np.array([y1, y2]))
    # xi < 0: complete from Y so the division stays away from <X|X> -> 0
    y1 = math.sqrt(ny)
    x1 = -1j * p.eta / y1
    x2 = math.sqrt(max(nx - abs(x1) ** 2, 0.0))
    return MachineRealization(np.array([x1, x2]), np.array([y1, 0.0], dtype=complex))


def _qubit_ab(psi: PureState) -> tuple[complex, complex]:
    if psi.dims != (2,):
        raise ValueError("machine input must be a single qubit")
    a, b = psi.amplitudes
    return complex(a), complex(b)


def machine_full_output(psi: PureState, p: MachineParams) -> PureState:
    """Joint A (x) B (x) M output for input ``psi`` and reference ``|0>``."""
    a, b = _qubit_ab(psi)
    r = realize_machine_states(p)
    rows = [a * (r.x + r.y), b * r.y, b * r.x, np.zeros(2, dtype=complex)]
    return PureState(np.concatenate(rows), (2, 2, 2))


def machine_rho(psi: PureState, p: MachineParams) -> DensityMatrix:
    a, b = _qubit_ab(psi)
    xi, eta = p.xi, p.eta
    ab = a * b.conjugate()
    bb = abs(b) ** 2
    m = np.array(
        [
            [abs(a) ** 2, ab * (-1j * eta + (1 - xi) / 2), ab * (1j * eta + (1 + xi) / 2), 0],
            [ab.conjugate() * (1j * eta + (1 - xi) / 2), bb * (1 - xi) / 2, 1j * bb * eta, 0],
            [ab.conjugate() * (-1j * eta + (1 + xi) / 2), -1j * bb * eta, bb * (1 + xi) / 2, 0],
            [0, 0, 0, 0],
        ],
        dtype=complex,
    )
    return DensityMatrix(m, (2, 2))


def machine_rho_tilde(psi: PureState, p: MachineParams) -> np.ndarray:
    a, b = _qubit_ab(psi)
    xi, eta = p.xi, p.eta
    ab = a * b.conjugate()
    ba = ab.conjugate()
    bb = abs(b) ** 2
    return np.array(
        [
            [0, 0, 0, 0],
            [0, bb * (1 + xi) / 2, 1j * bb * eta, -ab * (1j * eta + (1 + xi) / 2)],
            [0, -1j * bb * eta, bb * (1 - xi) / 2, -ab * (-1j * eta + (1 - xi) / 2)],
            [0, -ba * (-1j * eta + (1 + xi) / 2), -ba * (1j * eta + (1 - xi) / 2), abs(a) ** 2],
        ],
        dtype=complex,
    )


def machine_rho_rhotilde(psi: PureState, p: MachineParams) -> np.ndarray:
    a, b = _qubit_ab(psi)
    xi, eta = p.xi, p.eta
    ab = a * b.conjugate()
    bb = abs(b) ** 2
    q = eta**2 + (1 - xi**2) / 4
    m_plus = q + 1j * eta * (1 - xi)
    m_minus = q - 1j * eta * (1 + xi)
    return np.array(
        [
            [0, ab * bb * m_minus, ab * bb * m_plus, -2 * ab**2 * (q - 1j * eta * xi)],
            [0, bb**2 * q, 1j * bb**2 * eta * (1 - xi), -ab * bb * m_plus],
            [0, -1j * bb**2 * eta * (1 + xi), bb**2 * q, -ab * bb * m_minus],
            [0, 0, 0, 0],
        ],
        dtype=complex,
    )


def machine_lambdas(p: MachineParams, b: complex) -> tuple[float, float, float, float]:
    bb = abs(b) ** 2
    half = eta_bound(p.xi)
    e = abs(p.eta)
    return (bb * (half + e), max(0.0, bb * (half - e)), 0.0, 0.0)


def machine_concurrence(p: MachineParams, b: complex) -> float:
    return 2.0 * abs(b) ** 2 * abs(p.eta)


def swap_operator(d: int) -> np.ndarray:
    """Permutation ``P |i, j> = |j, i>`` on ``d (x) d``."""
    p = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            p[j * d + i, i * d + j] = 1.0
    return p


def optimal_entangler(d: int = 2) -> np.ndarray:
    """``(I + iP)/sqrt(2) = exp(i pi/4 P)`` on ``d (x) d``."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return (np.eye(d * d) + 1j * swap_operator(d)) / math.sqrt(2.0)


def optimal_entangler_pauli() -> np.ndarray:
    """Qubit form ``e^{i pi/8} exp(i pi/8 sigma.sigma)``."""
    dot = sum(kron(s, s) for s in PAULIS)
    return cmath.exp(1j * math.pi / 8) * expm_skew(math.pi / 8 * dot)


def entangle(psi: PureState, phi: PureState) -> PureState:
    """``(|psi phi> + i |phi psi>)/sqrt(2)``; normalized for any pair."""
    if psi.dims != phi.dims or len(psi.dims) != 1:
        raise ValueError("entangle needs two single-party states of equal dimension")
    amps = (product(psi, phi).amplitudes + 1j * product(phi, psi).amplitudes) / math.sqrt(2.0)
    return PureState(amps, psi.dims + phi.dims)


def reduced_out(psi: PureState, phi: PureState, side: int = 0) -> DensityMatrix:
    """Exact one-party state of ``entangle(psi, phi)``.

    ``(|psi><psi| + |phi><phi| + cross terms)/2`` where the cross terms carry
    the overlap ``<psi|phi>`` and vanish for orthogonal inputs.  Side B is the
    complex conjugate pattern of side A.
    """
    if psi.dims != phi.dims or len(psi.dims) != 1:
        raise ValueError("need two single-party states of equal dimension")
    if side not in (0, 1):
        raise IndexError("side must be 0 or 1")
    u, v = psi.amplitudes, phi.amplitudes
    s = np.vdot(u, v)  # <psi|phi>
    pp, ff = np.outer(u, u.conj()), np.outer(v, v.conj())
    pf, fp = np.outer(u, v.conj()), np.outer(v, u.conj())
    if side == 0:
        m = pp + ff - 1j * s * pf + 1j * s.conjugate() * fp
    else:
        m = pp + ff + 1j * s * pf - 1j * s.conjugate() * fp
    return DensityMatrix(0.5 * m, psi.dims)
