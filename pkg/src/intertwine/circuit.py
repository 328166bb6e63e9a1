"""Probabilistic generalized symmetrizer built from a Fredkin gate.

Gate sequence on ``A (x) B (x) control`` with the control starting in |0>::

    H(control) -> diag(e^{i t/2}, e^{-i t/2})(control) -> CSWAP(A, B | control) -> H(control)

Measuring the control then leaves A, B in
``(|phi psi> + e^{i t}|psi phi>)/N+`` (outcome 0) or
``(|phi psi> - e^{i t}|psi phi>)/N-`` (outcome 1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .measures import concurrence_pure
from .states import SIGMA_Y, DensityMatrix, PureState, product

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
ZERO_BRANCH_TOL = 1e-14


@dataclass(frozen=True)
class BranchOutcome:
    control_bit: int
    probability: float
    post_state: PureState | None
    concurrence: float | None


def _check_pair(psi: PureState, phi: PureState) -> int:
    if psi.dims != phi.dims or len(psi.dims) != 1:
        raise ValueError("need two single-party states of equal dimension")
    return psi.dims[0]


def on_control(gate: np.ndarray, d: int) -> np.ndarray:
    return np.kron(np.eye(d * d), gate)


def phase_gate(theta: float) -> np.ndarray:
    return np.diag([cmath.exp(0.5j * theta), cmath.exp(-0.5j * theta)])


def controlled_swap(d: int) -> np.ndarray:
    """Fredkin gate on ``[d, d, 2]``: swap A and B when the control (last) is 1."""
    n = 2 * d * d
    u = np.zeros((n, n), dtype=complex)
    for i in range(d):
        for j in range(d):
            u[(i * d + j) * 2, (i * d + j) * 2] = 1.0
            u[(j * d + i) * 2 + 1, (i * d + j) * 2 + 1] = 1.0
    return u


def symmetrizer_unitary(d: int, theta: float) -> np.ndarray:
    h = on_control(HADAMARD, d)
    return h @ controlled_swap(d) @ on_control(phase_gate(theta), d) @ h


def symmetrizer_circuit_state(psi: PureState, phi: PureState, theta: float) -> PureState:
    """Run the gate sequence on ``|psi>|phi>|0>``."""
    d = _check_pair(psi, phi)
    start = product(psi, phi, PureState.basis(0, (2,)))
    return PureState(symmetrizer_unitary(d, theta) @ start.amplitudes, (d, d, 2))


def symmetrizer_closed_form(psi: PureState, phi: PureState, theta: float) -> PureState:
    """Branch-resolved output written directly in terms of the swapped products."""
    d = _check_pair(psi, phi)
    pf = product(psi, phi).amplitudes
    fp = product(phi, psi).amplitudes
    em, ep = cmath.exp(-0.5j * theta), cmath.exp(0.5j * theta)
    zero = 0.5 * (em * fp + ep * pf)
    one = 0.5 * (ep * pf - em * fp)
    return PureState(np.stack([zero, one], axis=1).ravel(), (d, d, 2))


def premeasure_density(psi: PureState, phi: PureState, theta: float = 0.0) -> DensityMatrix:
    """A, B state before the control is read: an even mixture of the two products.

    ``theta`` is accepted for symmetry with the other calls and has no effect.
    """
    d = _check_pair(psi, phi)
    pf = product(psi, phi).density().matrix
    fp = product(phi, psi).density().matrix
    return DensityMatrix(0.5 * (pf + fp), (d, d))


def measure_control(state: PureState) -> tuple[BranchOutcome, BranchOutcome]:
    """Enumerate both control outcomes of a ``[d, d, 2]`` circuit state."""
    if len(state.dims) != 3 or state.dims[2] != 2:
        raise ValueError("last subsystem must be the control qubit")
    d = state.dims[0]
    amps = state.amplitudes.reshape(-1, 2)
    outcomes = []
    for bit in (0, 1):
        branch = amps[:, bit]
        prob = float(np.vdot(branch, branch).real)
        if prob <= ZERO_BRANCH_TOL:
            outcomes.append(BranchOutcome(bit, prob, None, None))
            continue
        post = PureState(branch / math.sqrt(prob), (d, d))
        conc = concurrence_pure(post) if d == 2 else None
        outcomes.append(BranchOutcome(bit, prob, post, conc))
    return outcomes[0], outcomes[1]


def sample_control(state: PureState, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Counts of control outcomes 0 and 1 over ``shots`` simulated readouts."""
    b0, _ = measure_control(state)
    ones = rng.binomial(shots, min(max(1.0 - b0.probability, 0.0), 1.0))
    return np.array([shots - ones, ones])


def branch_norms_sq(psi: PureState, phi: PureState, theta: float) -> tuple[float, float]:
    """``N+^2, N-^2 = 2 (1 +/- cos(theta) |<psi|phi>|^2)``."""
    ov = abs(psi.inner(phi)) ** 2
    c = math.cos(theta) * ov
    return 2.0 * (1.0 + c), 2.0 * (1.0 - c)


def flip_overlap_product(psi: PureState, phi: PureState) -> float:
    """``|<phi|psi~><psi|phi~>|``, the concurrence of ``entangle(psi, phi)``."""
    if psi.dims != (2,) or phi.dims != (2,):
        raise ValueError("spin-flip overlaps need qubit inputs")
    u, v = psi.amplitudes, phi.amplitudes
    u_t, v_t = SIGMA_Y @ u.conj(), SIGMA_Y @ v.conj()
    return float(abs(np.vdot(v, u_t) * np.vdot(u, v_t)))


def branch_concurrences(psi: PureState, phi: PureState, theta: float) -> tuple[float, float]:
    """``C+/- = 2 |<phi|psi~><psi|phi~>| / N+/-^2``.

    A branch with vanishing norm never fires; it is reported with
    concurrence 0.
    """
    x = flip_overlap_product(psi, phi)
    out = []
    for n2 in branch_norms_sq(psi, phi, theta):
        out.append(2.0 * x / n2 if n2 > 4 * ZERO_BRANCH_TOL else 0.0)
    return out[0], out[1]


def average_concurrence(psi: PureState, phi: PureState, theta: float) -> float:
    np_, nm = branch_norms_sq(psi, phi, theta)
    cp, cm = branch_concurrences(psi, phi, theta)
    return np_ / 4.0 * cp + nm / 4.0 * cm
