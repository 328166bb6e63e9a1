"""Evidence that only a relative phase of +/- i can be imprinted deterministically.

Two routes are provided.  ``consistency_residual`` follows the linearity
argument: the machine must send |00>|v> -> |00>|v0> and
|10>|v> -> (|10> + e^{it}|01>)|v1>, so unitarity fixes <v0|v0> = 1 and
<v1|v1> = 1/2, while linearity on (|0>+|1>)|0>/sqrt2 forces
v0 = (1 + e^{it}) v1.  The mismatch ``|1 + e^{it}|^2 / 2 - 1 = cos t`` is the
residual.  ``optimize_machine`` searches unitaries on A (x) B (x) M directly
for the best worst-case fidelity with the ideal output.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .states import DensityMatrix, PureState, bloch_amplitudes, block_generator, product, sample_bloch_angles

DEGENERATE_TOL = 1e-12
FIXED_PROBES = (
    np.array([1.0, 0.0], dtype=complex),
    np.array([0.0, 1.0], dtype=complex),
    np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),
)
_PROBE_BLOCK = 0
_RESTART_BLOCK = 1


class DegenerateTargetError(ValueError):
    pass


@dataclass(frozen=True)
class ConsistencyCheck:
    theta: float
    residual: float


@dataclass(frozen=True, eq=False)
class SearchResult:
    theta: float
    machine_dim: int
    best_worst_fidelity: float
    evaluations: int
    seed: int
    parameters: np.ndarray
    probe_count: int
    skipped_probes: tuple[int, ...] = field(default=())


def consistency_residual(theta: float) -> ConsistencyCheck:
    # |1 + e^{it}|^2 / 2 - 1 == cos t; evaluated in closed form so the zeros are exact
    return ConsistencyCheck(float(theta), abs(math.cos(theta)))


def residual_sweep(theta_grid: Iterable[float]) -> list[ConsistencyCheck]:
    return [consistency_residual(t) for t in sorted(float(t) for t in theta_grid)]


def ideal_target(psi: PureState, phi: PureState, theta: float) -> PureState:
    """Normalized ``|psi phi> + e^{i theta} |phi psi>``.

    At ``theta = pi/2`` this is exactly ``entangle(psi, phi)``.  The opposite
    ordering ``|phi psi> + e^{i theta}|psi phi>`` is the same ray at ``-theta``.
    """
    if psi.dims != phi.dims or len(psi.dims) != 1:
        raise ValueError("need two single-party states of equal dimension")
    vec = product(psi, phi).amplitudes + cmath.exp(1j * theta) * product(phi, psi).amplitudes
    norm_sq = float(np.vdot(vec, vec).real)
    if norm_sq <= DEGENERATE_TOL:
        raise DegenerateTargetError(f"target vanishes at theta={theta} for these inputs")
    return PureState(vec / math.sqrt(norm_sq), psi.dims + phi.dims)


def fidelity_pure_mixed(rho: DensityMatrix, target: PureState) -> float:
    if rho.dims != target.dims:
        raise ValueError(f"dims {list(rho.dims)} and {list(target.dims)} differ")
    t = target.amplitudes
    return float(np.vdot(t, rho.matrix @ t).real)


def hermitian_from_params(params: np.ndarray, n: int) -> np.ndarray:
    """n*n reals -> Hermitian n x n: diagonal, then upper real parts, then upper imaginary parts."""
    params = np.asarray(params, dtype=float)
    if params.size != n * n:
        raise ValueError(f"expected {n * n} parameters, got {params.size}")
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = params[:n]
    h[iu] = params[n : n + m] + 1j * params[n + m :]
    h[(iu[1], iu[0])] = np.conj(h[iu])
    return h


def params_from_hermitian(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([h.diagonal().real, h[iu].real, h[iu].imag])


def entangler_parameters(machine_dim: int, sign: int = 1) -> np.ndarray:
    """Generator of ``exp(+/- i pi/4 P) (x) I_M``; the +1 branch realizes theta = pi/2."""
    from .machines import swap_operator

    h = sign * math.pi / 4 * np.kron(swap_operator(2), np.eye(machine_dim))
    return params_from_hermitian(h)


def probe_states(probe_count: int, seed: int) -> np.ndarray:
    """Fixed probes |0>, |1>, |+> followed by seeded uniform Bloch states."""
    if probe_count < len(FIXED_PROBES):
        raise ValueError(f"need at least {len(FIXED_PROBES)} probes")
    extra = probe_count - len(FIXED_PROBES)
    theta, phi = sample_bloch_angles(block_generator(seed, _PROBE_BLOCK), extra)
    return np.vstack([np.array(FIXED_PROBES), bloch_amplitudes(theta, phi).reshape(extra, 2)])


class _Objective:
    """Worst-case fidelity over the probes for a parametrized machine unitary."""

    def __init__(self, theta: float, machine_dim: int, probes: np.ndarray):
        self.theta = theta
        self.machine_dim = machine_dim
        self.n = 4 * machine_dim
        ref = PureState([1.0, 0.0])
        targets, used, skipped = [], [], []
        for k, amps in enumerate(probes):
            try:
                t = ideal_target(PureState(amps), ref, theta)
            except DegenerateTargetError:
                skipped.append(k)
                continue
            targets.append(t.amplitudes)
            used.append(amps)
        if not used:
            raise DegenerateTargetError("every probe has a vanishing target")
        self.skipped = tuple(skipped)
        self.inputs = np.array(used).T  # (2, P): amplitudes of psi on |0>, |1>
        self.targets_conj = np.array(targets).conj().T  # (4, P)
        # columns of U hit by |i>_A |0>_B |0>_M
        self.cols = [0, 2 * machine_dim]

    def __call__(self, params: np.ndarray) -> float:
        h = hermitian_from_params(params, self.n)
        w, v = np.linalg.eigh(h)
        u_cols = v @ (np.exp(1j * w)[:, None] * v[self.cols, :].conj().T)
        out = (u_cols @ self.inputs).reshape(4, self.machine_dim, -1)
        amp = np.einsum("ap,amp->mp", self.targets_conj, out)
        fid = np.sum(np.abs(amp) ** 2, axis=0)
        return float(np.min(fid))


class _BudgetExhausted(Exception):
    pass


class _Tracker:
    def __init__(self, objective: _Objective, budget: int):
        self.objective = objective
        self.budget = budget
        self.count = 0
        self.best = -math.inf
        self.best_x: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> float:
        if self.count >= self.budget:
            raise _BudgetExhausted
        self.count += 1
        f = self.objective(x)
        if f > self.best:
            self.best = f
            self.best_x = np.array(x, dtype=float)
        return -f


def evaluate_parameters(theta: float, machine_dim: int, params: np.ndarray, probe_count: int, seed: int) -> float:
    """Recompute the worst-case fidelity of a parameter vector."""
    return _Objective(theta, machine_dim, probe_states(probe_count, seed))(params)


def optimize_machine(
    theta: float,
    machine_dim: int = 2,
    probe_count: int = 6,
    budget: int = 20_000,
    seed: int = 0,
    initial: Sequence[float] | None = None,
) -> SearchResult:
    """Search machine unitaries ``exp(i H)`` for the best worst-case fidelity.

    The evaluation stream is a fixed sequence of rounds, each spending half
    its evaluations on uniform random restarts (entries in [-pi, pi]) and half
    on Nelder-Mead from the best point so far.  ``budget`` only truncates
    that stream, so a larger budget can never report a worse optimum.
    """
    if machine_dim < 1 or budget < 1:
        raise ValueError("machine_dim and budget must be >= 1")
    objective = _Objective(theta, machine_dim, probe_states(probe_count, seed))
    if objective.skipped:
        warnings.warn(f"probes {list(objective.skipped)} have a vanishing target and were skipped", stacklevel=2)
    n_params = objective.n**2
    half = max(500, 4 * (n_params + 1))
    track = _Tracker(objective, budget)
    try:
        if initial is not None:
            track(np.asarray(initial, dtype=float))
        r = 0
        while True:
            rng = block_generator(seed, _RESTART_BLOCK + r)
            for _ in range(half):
                track(rng.uniform(-math.pi, math.pi, n_params))
            minimize(
                track,
                track.best_x,
                method="Nelder-Mead",
                options={"maxfev": half, "xatol": 1e-13, "fatol": 1e-15, "adaptive": True},
            )
            r += 1
    except _BudgetExhausted:
        pass
    return SearchResult(
        theta=float(theta),
        machine_dim=machine_dim,
        best_worst_fidelity=track.best,
        evaluations=track.count,
        seed=seed,
        parameters=track.best_x,
        probe_count=probe_count,
        skipped_probes=objective.skipped,
    )
