"""Dense state-vector engine over the fixed (n, m, m, 1) register layout.

Amplitudes are held as a complex128 array of shape ``(2**n, 2**m, 2**m, 2)``
indexed ``[s, x, z, anc]``. Flattened in C order this is exactly
``idx = ((s * 2**m + x) * 2**m + z) * 2 + anc`` (register 1 most significant).

Basis maps are vectorized: a map receives broadcastable integer arrays
``(s, x, z, anc)`` and returns the image arrays.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import hadamard

IndexArrays = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
BasisFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], IndexArrays]
Predicate = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]

NORM_TOL = 1e-10
IMPOSSIBLE = 1e-15


class InvalidStateError(ValueError):
    pass


class NotAPermutationError(ValueError):
    pass


@dataclass(frozen=True)
class RegisterLayout:
    n: int
    m: int
    anc: int = 1

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 1:
            raise ValueError(f"bad layout n={self.n}, m={self.m}")
        if self.anc != 1:
            raise ValueError("register 4 is a single qubit")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (2**self.n, 2**self.m, 2**self.m, 2)

    @property
    def num_qubits(self) -> int:
        return self.n + 2 * self.m + 1

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def index(self, s: int, x: int, z: int, anc: int) -> int:
        M = 2**self.m
        return ((s * M + x) * M + z) * 2 + anc

    def unindex(self, idx: int) -> tuple[int, int, int, int]:
        return tuple(int(v) for v in np.unravel_index(idx, self.shape))  # type: ignore[return-value]

    def satisfies_size_constraint(self) -> bool:
        return self.n < self.m - 1

    def grids(self) -> IndexArrays:
        S, X, Z, A = self.shape
        return (
            np.arange(S, dtype=np.int64).reshape(S, 1, 1, 1),
            np.arange(X, dtype=np.int64).reshape(1, X, 1, 1),
            np.arange(Z, dtype=np.int64).reshape(1, 1, Z, 1),
            np.arange(A, dtype=np.int64).reshape(1, 1, 1, A),
        )


@dataclass
class StateVector:
    layout: RegisterLayout
    amps: np.ndarray

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=np.complex128).reshape(self.layout.shape)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amps.copy())

    def flat(self) -> np.ndarray:
        return self.amps.reshape(-1)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True)
class MeasurementRecord:
    register: int
    outcome: int
    probability: float


def init_phi0(layout: RegisterLayout) -> StateVector:
    amps = np.zeros(layout.shape, dtype=np.complex128)
    amps[0, 0, 1, 0] = 1.0
    return StateVector(layout, amps)


def _register_axis(register: int) -> int:
    if register not in (1, 2, 3, 4):
        raise ValueError(f"register must be 1..4, got {register}")
    return register - 1


def _apply_on_axis(amps: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(matrix, amps, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def hadamard_all(state: StateVector, register: int) -> StateVector:
    """H on every qubit of register 1 or 2 (a normalized Walsh-Hadamard transform)."""
    if register not in (1, 2):
        raise ValueError("hadamard_all acts on register 1 or 2")
    axis = _register_axis(register)
    k = state.amps.shape[axis]
    if k == 1:
        return state.copy()
    H = hadamard(k).astype(np.complex128) / np.sqrt(k)
    return StateVector(state.layout, _apply_on_axis(state.amps, H, axis))


def qft_register2(state: StateVector, inverse: bool = False) -> StateVector:
    """QFT_K |j> = K^-1/2 sum_k exp(+2 pi i j k / K) |k> on each register-2 slice.

    numpy's ``ifft`` carries the ``+`` kernel, so with orthonormal scaling the
    forward transform is ``ifft`` and the inverse is ``fft``.
    """
    fn = np.fft.fft if inverse else np.fft.ifft
    return StateVector(state.layout, fn(state.amps, axis=1, norm="ortho"))


def basis_targets(layout: RegisterLayout, fn: BasisFn) -> np.ndarray:
    """Flat target index of every basis state under ``fn``."""
    s, x, z, anc = layout.grids()
    s2, x2, z2, a2 = (np.broadcast_to(v, layout.shape) for v in fn(s, x, z, anc))
    S, X, Z, A = layout.shape
    return (((s2 * X + x2) * Z + z2) * A + a2).reshape(-1)


def apply_basis_map(state: StateVector, fn: BasisFn) -> StateVector:
    """Permute amplitudes: ``amps'[fn(i)] = amps[i]``.

    The map must be a bijection on the full basis; the check is exhaustive.
    """
    layout = state.layout
    target = basis_targets(layout, fn)
    dim = layout.dim
    if target.min() < 0 or target.max() >= dim:
        raise NotAPermutationError("not a permutation: image leaves the basis")
    if np.any(np.bincount(target, minlength=dim) != 1):
        raise NotAPermutationError("not a permutation: map is not injective")
    out = np.empty(dim, dtype=np.complex128)
    out[target] = state.flat()
    return StateVector(layout, out)


def register_marginal(state: StateVector, register: int) -> np.ndarray:
    axis = _register_axis(register)
    others = tuple(i for i in range(4) if i != axis)
    return state.probabilities().sum(axis=others)


def sample_index(cumulative: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw used by every sampler in the package (one uniform per draw)."""
    u = rng.random() * cumulative[-1]
    return int(min(np.searchsorted(cumulative, u, side="right"), len(cumulative) - 1))


def measure(
    state: StateVector, register: int, rng: np.random.Generator
) -> tuple[MeasurementRecord, StateVector]:
    axis = _register_axis(register)
    probs = register_marginal(state, register)
    total = probs.sum()
    if not np.isfinite(total) or total < IMPOSSIBLE:
        raise InvalidStateError("invalid state: zero norm")
    probs = np.where(probs / total < IMPOSSIBLE, 0.0, probs)
    outcome = sample_index(np.cumsum(probs), rng)
    p = float(probs[outcome] / total)
    amps = np.zeros_like(state.amps)
    sl = [slice(None)] * 4
    sl[axis] = outcome
    amps[tuple(sl)] = state.amps[tuple(sl)] / np.sqrt(probs[outcome])
    return MeasurementRecord(register, outcome, p), StateVector(state.layout, amps)


def marginal_probability(state: StateVector, predicate: Predicate) -> float:
    """Sum of |amp|^2 over basis states where ``predicate(s, x, z, anc)`` holds."""
    mask = np.broadcast_to(predicate(*state.layout.grids()), state.layout.shape)
    return float(state.probabilities()[mask].sum())


def dump_csv(state: StateVector, threshold: float = 1e-12) -> str:
    """Debug dump: one ``s,x,z,anc,re,im`` row per amplitude above ``threshold``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "x", "z", "anc", "re", "im"])
    for idx in np.flatnonzero(np.abs(state.flat()) > threshold):
        amp = state.flat()[idx]
        w.writerow([*state.layout.unindex(int(idx)), repr(float(amp.real)), repr(float(amp.imag))])
    return buf.getvalue()
