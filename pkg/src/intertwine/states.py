"""Pure and mixed states, Bloch directions, spin flips and samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .linalg import HERMITIAN_TOL, kron, partial_trace

NORM_TOL = 1e-9
RENORMALIZE_TOL = 1e-6
ANGLE_TOL = 1e-6
TRACE_TOL = 1e-9

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class BlochDirection:
    """Polar angle ``theta`` in [0, pi] and azimuth ``phi`` in [0, 2 pi).

    Values a hair outside the range (rounding in decimal input) are clamped.
    """

    theta: float
    phi: float

    def __post_init__(self) -> None:
        theta, phi = float(self.theta), float(self.phi)
        if not (-ANGLE_TOL <= theta <= math.pi + ANGLE_TOL):
            raise ValueError(f"theta={theta} outside [0, pi]")
        if not (-ANGLE_TOL <= phi < 2 * math.pi + ANGLE_TOL):
            raise ValueError(f"phi={phi} outside [0, 2pi)")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        object.__setattr__(self, "phi", min(max(phi, 0.0), 2 * math.pi))

    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    def antipode(self) -> BlochDirection:
        return BlochDirection(math.pi - self.theta, (self.phi + math.pi) % (2 * math.pi))


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over subsystems ``dims`` (row-major)."""

    amplitudes: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        dims = tuple(int(d) for d in self.dims) or (amps.size,)
        if math.prod(dims) != amps.size:
            raise ValueError(f"dims {list(dims)} do not match {amps.size} amplitudes")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > RENORMALIZE_TOL:
            raise ValueError(f"state norm {norm:.9g} is not 1")
        if abs(norm - 1.0) > 0.0:
            amps = amps / norm
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "dims", dims)

    @classmethod
    def basis(cls, index: int, dims: Sequence[int]) -> PureState:
        amps = np.zeros(math.prod(dims), dtype=complex)
        amps[index] = 1.0
        return cls(amps, tuple(dims))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def inner(self, other: PureState) -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> DensityMatrix:
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()), self.dims)

    def __repr__(self) -> str:
        return f"PureState({np.array2string(self.amplitudes, precision=6)}, dims={list(self.dims)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix over subsystems ``dims``.

    Positivity is not checked on construction; the operations that need it
    (square roots, concurrence) raise on a negative eigenvalue.
    """

    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        dims = tuple(int(d) for d in self.dims) or (m.shape[0],)
        if math.prod(dims) != m.shape[0]:
            raise ValueError(f"dims {list(dims)} do not match size {m.shape[0]}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr:.12g} is not 1")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))
        object.__setattr__(self, "dims", dims)

    def partial_trace(self, keep: int) -> DensityMatrix:
        return DensityMatrix(partial_trace(self.matrix, self.dims, keep), (self.dims[keep],))


StateLike = Union[PureState, DensityMatrix]


def qubit_from_bloch(direction: BlochDirection) -> PureState:
    """``(cos(t/2) e^{-i p/2}, sin(t/2) e^{i p/2})``, phases kept as written."""
    return PureState(bloch_amplitudes(direction.theta, direction.phi), (2,))


def bloch_amplitudes(theta, phi) -> np.ndarray:
    """Vectorized qubit amplitudes; output shape ``theta.shape + (2,)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    half = 0.5j * phi
    return np.stack([np.cos(theta / 2) * np.exp(-half), np.sin(theta / 2) * np.exp(half)], axis=-1)


def spin_flip(psi: PureState) -> PureState:
    """``sigma_y |psi*>``; orthogonal to ``psi`` for every qubit state."""
    if psi.dims != (2,):
        raise ValueError("spin flip is defined for a single qubit")
    return PureState(SIGMA_Y @ psi.amplitudes.conj(), (2,))


def tilde_two_qubit(x):
    """Two-qubit spin flip of a ket (``YY |x*>``) or a matrix (``YY x* YY``).

    Accepts :class:`PureState`, :class:`DensityMatrix` or a bare array and
    returns the same kind.
    """
    if isinstance(x, PureState):
        if x.dims != (2, 2):
            raise ValueError("tilde needs dims [2, 2]")
        return PureState(SIGMA_YY @ x.amplitudes.conj(), (2, 2))
    if isinstance(x, DensityMatrix):
        if x.dims != (2, 2):
            raise ValueError("tilde needs dims [2, 2]")
        return DensityMatrix(SIGMA_YY @ x.matrix.conj() @ SIGMA_YY, (2, 2))
    a = np.asarray(x, dtype=complex)
    if a.shape == (4,):
        return SIGMA_YY @ a.conj()
    if a.shape == (4, 4):
        return SIGMA_YY @ a.conj() @ SIGMA_YY
    raise ValueError(f"tilde needs a 4-vector or 4x4 matrix, got shape {a.shape}")


def product(*states: PureState) -> PureState:
    amps = kron(*(s.amplitudes for s in states))
    dims = tuple(d for s in states for d in s.dims)
    return PureState(amps, dims)


# Random streams: Philox keyed by the seed, with the block index in the high
# counter words.  Sample i always lives in block i // BLOCK_SIZE, so any
# partition of the index space reproduces the serial stream.

BLOCK_SIZE = 4096


def block_generator(seed: int, block: int = 0) -> np.random.Generator:
    if seed < 0 or block < 0:
        raise ValueError("seed and block must be non-negative")
    return np.random.Generator(np.random.Philox(key=seed, counter=block << 128))


def sample_bloch_angles(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random((n, 2))
    theta = np.arccos(np.clip(2.0 * u[:, 0] - 1.0, -1.0, 1.0))
    return theta, 2.0 * math.pi * u[:, 1]


def sample_bloch_uniform(rng: np.random.Generator) -> BlochDirection:
    """Uniform direction on the sphere: cos(theta) ~ U[-1, 1], phi ~ U[0, 2 pi)."""
    theta, phi = sample_bloch_angles(rng, 1)
    return BlochDirection(theta[0], phi[0])


def sample_haar_amplitudes(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, 2, d))
    z = g[:, 0, :] + 1j * g[:, 1, :]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_pure_haar(d: int, rng: np.random.Generator) -> PureState:
    """Unitarily invariant random pure state in dimension ``d``."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return PureState(sample_haar_amplitudes(rng, 1, d)[0], (d,))
