"""Monte Carlo averages and cross-check sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import average_concurrence, premeasure_density, symmetrizer_circuit_state, symmetrizer_closed_form
from .linalg import partial_trace
from .machines import (
    MachineParams,
    entangle,
    eta_bound,
    machine_concurrence,
    machine_full_output,
    machine_lambdas,
    machine_rho,
)
from .measures import (
    concurrence_bloch,
    concurrence_from_angles,
    concurrence_mixed,
    concurrence_pure,
    ppt_min_eigenvalue,
)
from .nogo import consistency_residual
from .states import (
    BLOCK_SIZE,
    SIGMA_YY,
    PureState,
    bloch_amplitudes,
    block_generator,
    qubit_from_bloch,
    sample_bloch_angles,
    sample_bloch_uniform,
    sample_haar_amplitudes,
)

THREADS_ENV = "INTERTWINE_THREADS"
GATE_SIGMAS = 5.0


class RunningStats:
    """Welford mean/variance accumulator; batches merge with Chan's update."""

    def __init__(self) -> None:
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def push_batch(self, xs: np.ndarray) -> None:
        other = RunningStats()
        xs = np.asarray(xs, dtype=float)
        if xs.size == 0:
            return
        other.count = xs.size
        other.mean = float(np.mean(xs))
        other.m2 = float(np.sum((xs - other.mean) ** 2))
        self.merge(other)

    def merge(self, other: RunningStats) -> None:
        if other.count == 0:
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / n
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.count = n

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else math.nan


@dataclass(frozen=True)
class EstimateReport:
    quantity: str
    samples: int
    mean: float
    stderr: float
    seed: int
    expected: float | None = None

    @property
    def z_score(self) -> float | None:
        if self.expected is None:
            return None
        if self.stderr == 0.0:
            return 0.0 if self.mean == self.expected else math.inf
        return (self.mean - self.expected) / self.stderr

    def within_gate(self, sigmas: float = GATE_SIGMAS) -> bool:
        z = self.z_score
        return z is None or abs(z) <= sigmas


# Per-sample value generators: (rng, n) -> array of n values.


def _bloch_pair_amplitudes(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    t1, p1 = sample_bloch_angles(rng, n)
    t2, p2 = sample_bloch_angles(rng, n)
    return bloch_amplitudes(t1, p1), bloch_amplitudes(t2, p2)


def _avg_concurrence(rng, n):
    t1, p1 = sample_bloch_angles(rng, n)
    t2, p2 = sample_bloch_angles(rng, n)
    return concurrence_from_angles(t1, p1, t2, p2)


def _avg_overlap(rng, n):
    u, v = _bloch_pair_amplitudes(rng, n)
    s = np.abs(np.einsum("ni,ni->n", u.conj(), v)) ** 2
    return 0.5 * (1.0 + s)


def _pure_concurrence_rows(states: np.ndarray) -> np.ndarray:
    flipped = states.conj() @ SIGMA_YY.T
    return np.abs(np.einsum("ni,ni->n", states.conj(), flipped))


def _avg_circuit_concurrence(theta: float):
    def gen(rng, n):
        u, v = _bloch_pair_amplitudes(rng, n)
        pf = np.einsum("ni,nj->nij", u, v).reshape(n, 4)
        fp = np.einsum("ni,nj->nij", v, u).reshape(n, 4)
        em, ep = np.exp(-0.5j * theta), np.exp(0.5j * theta)
        total = np.zeros(n)
        for branch in (0.5 * (em * fp + ep * pf), 0.5 * (ep * pf - em * fp)):
            prob = np.sum(np.abs(branch) ** 2, axis=1)
            live = prob > 1e-14
            normed = np.zeros_like(branch)
            normed[live] = branch[live] / np.sqrt(prob[live])[:, None]
            total += np.where(live, prob * _pure_concurrence_rows(normed), 0.0)
        return total

    return gen


def _avg_i_concurrence(d: int):
    def gen(rng, n):
        u = sample_haar_amplitudes(rng, n, d)
        v = sample_haar_amplitudes(rng, n, d)
        psi = (np.einsum("ni,nj->nij", u, v) + 1j * np.einsum("ni,nj->nij", v, u)) / math.sqrt(2.0)
        rho_a = np.einsum("nij,nkj->nik", psi, psi.conj())
        pur = np.einsum("nij,nji->n", rho_a, rho_a).real
        return np.sqrt(np.clip(2.0 * (1.0 - pur), 0.0, None))

    return gen


QUANTITIES = ("avg_concurrence", "avg_overlap", "avg_circuit_concurrence", "avg_i_concurrence")


def _resolve(quantity: str, theta: float | None, dim: int | None) -> tuple[str, Callable, float]:
    if quantity == "avg_concurrence":
        return quantity, _avg_concurrence, 0.5
    if quantity == "avg_overlap":
        return quantity, _avg_overlap, 0.75
    if quantity == "avg_circuit_concurrence":
        theta = 0.0 if theta is None else float(theta)
        return f"avg_circuit_concurrence(theta={theta!r})", _avg_circuit_concurrence(theta), 0.5
    if quantity == "avg_i_concurrence":
        dim = 2 if dim is None else int(dim)
        if dim < 2:
            raise ValueError("dimension must be at least 2")
        return f"avg_i_concurrence(d={dim})", _avg_i_concurrence(dim), 1.0 - 1.0 / dim
    raise ValueError(f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def estimate(
    quantity: str,
    samples: int,
    seed: int = 0,
    theta: float | None = None,
    dim: int | None = None,
    workers: int | None = None,
) -> EstimateReport:
    """Monte Carlo mean of ``quantity`` over independent random input pairs.

    Samples are generated in fixed blocks of ``BLOCK_SIZE`` indices, each
    from its own counter-based stream, and block statistics are merged in
    block order, so the report does not depend on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    name, gen, expected = _resolve(quantity, theta, dim)
    n_blocks = -(-samples // BLOCK_SIZE)

    def run_block(k: int) -> RunningStats:
        n = min(BLOCK_SIZE, samples - k * BLOCK_SIZE)
        stats = RunningStats()
        stats.push_batch(gen(block_generator(seed, k), n))
        return stats

    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            blocks = list(pool.map(run_block, range(n_blocks)))
    else:
        blocks = [run_block(k) for k in range(n_blocks)]
    total = RunningStats()
    for b in blocks:
        total.merge(b)
    return EstimateReport(name, samples, total.mean, total.stderr, seed, expected)


@dataclass(frozen=True)
class GridRow:
    xi: float
    eta: float
    trial: int
    a: complex
    b: complex
    lambda_error: float
    concurrence_error: float
    trace_error: float
    passed: bool


GRID_TOL = 1e-9
TRACE_TOL = 1e-12


def grid_points(xi_steps: int, eta_steps: int) -> list[tuple[float, float]]:
    """xi across [-1, 1]; eta across its full range, both Cauchy-Schwarz edges included."""
    pts = []
    for xi in np.linspace(-1.0, 1.0, xi_steps):
        bound = eta_bound(float(xi))
        for frac in np.linspace(-1.0, 1.0, eta_steps):
            pts.append((float(xi), float(frac * bound)))
    return pts


def grid_validate(xi_steps: int = 10, eta_steps: int = 10, trials: int = 20, seed: int = 0) -> list[GridRow]:
    """Closed-form machine spectrum and concurrence against the numeric pipeline."""
    rng = block_generator(seed)
    rows = []
    for xi, eta in grid_points(xi_steps, eta_steps):
        p = MachineParams(xi, eta)
        for trial in range(trials):
            a, b = sample_haar_amplitudes(rng, 1, 2)[0]
            psi = PureState([a, b])
            rho = machine_rho(psi, p)
            report = concurrence_mixed(rho)
            lam_err = float(np.max(np.abs(np.array(report.lambdas) - np.array(machine_lambdas(p, b)))))
            c_err = float(abs(report.concurrence - machine_concurrence(p, b)))
            full = machine_full_output(psi, p).density().matrix
            tr_err = float(np.max(np.abs(partial_trace(full, (2, 2, 2), [0, 1]) - rho.matrix)))
            ok = bool(lam_err <= GRID_TOL and c_err <= GRID_TOL and tr_err <= TRACE_TOL)
            rows.append(GridRow(xi, eta, trial, complex(a), complex(b), lam_err, c_err, tr_err, ok))
    return rows


@dataclass(frozen=True)
class CheckRow:
    check: str
    max_error: float
    tolerance: float
    passed: bool


def _check(name: str, errors: list[float], tol: float) -> CheckRow:
    worst = float(max(errors)) if errors else 0.0
    return CheckRow(name, worst, tol, worst <= tol)


def run_validation(seed: int = 0, pairs: int = 200) -> tuple[list[CheckRow], list[GridRow]]:
    """Every internal closed-form versus numeric cross-check in one pass."""
    rng = block_generator(seed, 1)
    bloch, wootters, circuit_route, circuit_avg, premeasure = [], [], [], [], []
    for k in range(pairs):
        n, m = sample_bloch_uniform(rng), sample_bloch_uniform(rng)
        psi, phi = qubit_from_bloch(n), qubit_from_bloch(m)
        out = entangle(psi, phi)
        c_closed = concurrence_bloch(n, m)
        bloch.append(abs(c_closed - concurrence_pure(out)))
        wootters.append(abs(c_closed - concurrence_mixed(out).concurrence))
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        gate = symmetrizer_circuit_state(psi, phi, theta)
        circuit_route.append(
            float(np.max(np.abs(gate.amplitudes - symmetrizer_closed_form(psi, phi, theta).amplitudes)))
        )
        circuit_avg.append(abs(average_concurrence(psi, phi, theta) - c_closed))
        if k % 10 == 0:
            rho = premeasure_density(psi, phi, theta)
            premeasure.append(max(0.0, -ppt_min_eigenvalue(rho)))
            premeasure.append(concurrence_mixed(rho).concurrence)
    grid = grid_validate(seed=seed)
    residual = [abs(consistency_residual(t).residual - abs(math.cos(t))) for t in np.linspace(0, 2 * math.pi, 721)]
    checks = [
        _check("bloch_vs_pure_concurrence", bloch, 1e-10),
        _check("bloch_vs_wootters", wootters, 1e-9),
        _check("circuit_gate_vs_closed_form", circuit_route, 1e-12),
        _check("circuit_average_vs_bloch", circuit_avg, 1e-10),
        _check("premeasure_separable", premeasure, 1e-10),
        _check("machine_grid_lambda", [r.lambda_error for r in grid], GRID_TOL),
        _check("machine_grid_concurrence", [r.concurrence_error for r in grid], GRID_TOL),
        _check("machine_grid_trace", [r.trace_error for r in grid], TRACE_TOL),
        _check("nogo_residual", residual, 0.0),
    ]
    return checks, grid


__all__ = [
    "EstimateReport",
    "GridRow",
    "CheckRow",
    "QUANTITIES",
    "RunningStats",
    "estimate",
    "grid_points",
    "grid_validate",
    "run_validation",
]
