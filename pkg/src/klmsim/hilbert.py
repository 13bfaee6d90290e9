"""Composite Hilbert-space bookkeeping and dense complex linear algebra.

States and operators carry a :class:`SpaceLayout` describing their ordered
subsystem structure as ``(label, dimension)`` pairs.  Indexing is mixed-radix
with the first listed subsystem as the most significant digit, so tensor
order matches left-to-right ket notation.

Everything here is dense (max dimension in practice is below 100) and
immutable after construction: operations return fresh values, which makes the
values safe to share between concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

__all__ = [
    "NORM_TOL",
    "SpaceLayout",
    "StateVector",
    "DenseOperator",
    "basis_state",
    "identity",
    "tensor",
    "embed",
    "overlap_fidelity",
    "commutator",
    "is_hermitian",
    "max_abs_diff",
]

#: Default tolerance for normalization and hermiticity checks.
NORM_TOL = 1e-12


def _frozen_array(values, shape_name: str) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    arr.setflags(write=False)
    return arr


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    """Max-abs-entry distance, the matrix/vector equality norm used throughout."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.asarray(a).size else 0.0


def is_hermitian(entries: np.ndarray, tol: float = NORM_TOL) -> bool:
    """True when ``max |M - M†| < tol``."""
    return max_abs_diff(entries, entries.conj().T) < tol


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered list of subsystems ``(label, dim)`` defining a composite space.

    Parameters
    ----------
    subsystems : tuple of (str, int)
        Unique labels with their local dimensions (all >= 2).

    Examples
    --------
    >>> SpaceLayout.of(("scq", 3), ("mode", 4)).dim
    12
    """

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(label), int(dim)) for label, dim in self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        if not subs:
            raise ValueError("layout needs at least one subsystem")
        labels = [label for label, _ in subs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        for label, dim in subs:
            if dim < 2:
                raise ValueError(f"subsystem {label!r} has dim {dim}; need >= 2")

    @classmethod
    def of(cls, *subsystems: tuple[str, int]) -> "SpaceLayout":
        return cls(tuple(subsystems))

    @property
    def dim(self) -> int:
        return math.prod(d for _, d in self.subsystems)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    def position(self, label: str) -> int:
        """Index of a subsystem within the ordered list."""
        for k, (name, _) in enumerate(self.subsystems):
            if name == label:
                return k
        raise KeyError(f"no subsystem labelled {label!r} in {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.subsystems[self.position(label)][1]

    def ravel(self, levels: Sequence[int]) -> int:
        """Mixed-radix index of a basis assignment (first subsystem most significant)."""
        if len(levels) != len(self.subsystems):
            raise ValueError(f"expected {len(self.subsystems)} levels, got {len(levels)}")
        index = 0
        for level, (label, dim) in zip(levels, self.subsystems):
            if not 0 <= level < dim:
                raise ValueError(f"level {level} out of range for subsystem {label!r} (dim {dim})")
            index = index * dim + level
        return index

    def unravel(self, index: int) -> tuple[int, ...]:
        """Per-subsystem digits of a flat basis index."""
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} out of range for dim {self.dim}")
        digits = []
        for _, dim in reversed(self.subsystems):
            digits.append(index % dim)
            index //= dim
        return tuple(reversed(digits))


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a :class:`SpaceLayout`."""

    layout: SpaceLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.amplitudes, "amplitudes")
        if arr.shape != (self.layout.dim,):
            raise ValueError(f"amplitudes shape {arr.shape} != layout dim ({self.layout.dim},)")
        object.__setattr__(self, "amplitudes", arr)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.layout, self.amplitudes / n)

    def amplitude(self, levels: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.layout.ravel(levels)])

    def populations(self, label: str) -> np.ndarray:
        """Marginal populations of one subsystem (sums |amplitude|^2 over the rest)."""
        pos = self.layout.position(label)
        probs = np.abs(self.amplitudes.reshape(self.layout.dims)) ** 2
        axes = tuple(k for k in range(len(self.layout.dims)) if k != pos)
        return probs.sum(axis=axes)


@dataclass(frozen=True)
class DenseOperator:
    """Dense complex square matrix over a :class:`SpaceLayout`.

    ``hermitian_hint=True`` asserts hermiticity (checked at construction to
    :data:`NORM_TOL`); it selects the eigendecomposition path in the
    propagators.  Non-Hermitian generators (decay terms) leave it False.
    """

    layout: SpaceLayout
    entries: np.ndarray
    hermitian_hint: bool = False

    def __post_init__(self):
        arr = _frozen_array(self.entries, "entries")
        d = self.layout.dim
        if arr.shape != (d, d):
            raise ValueError(f"entries shape {arr.shape} != ({d}, {d})")
        if self.hermitian_hint and not is_hermitian(arr):
            raise ValueError("hermitian_hint set but max |M - M†| >= 1e-12")
        object.__setattr__(self, "entries", arr)

    def dag(self) -> "DenseOperator":
        return DenseOperator(self.layout, self.entries.conj().T, self.hermitian_hint)

    def apply(self, state: StateVector) -> StateVector:
        if state.layout != self.layout:
            raise ValueError("operator and state layouts differ")
        return StateVector(self.layout, self.entries @ state.amplitudes)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        if not isinstance(other, DenseOperator):
            return NotImplemented
        if other.layout != self.layout:
            raise ValueError("operator layouts differ")
        return DenseOperator(self.layout, self.entries @ other.entries)


def basis_state(layout: SpaceLayout, levels: Union[Sequence[int], Mapping[str, int]]) -> StateVector:
    """Computational basis state, levels given in layout order or by label."""
    if isinstance(levels, Mapping):
        missing = set(layout.labels) - set(levels)
        if missing:
            raise ValueError(f"missing levels for subsystems {sorted(missing)}")
        levels = [levels[label] for label in layout.labels]
    amps = np.zeros(layout.dim, dtype=complex)
    amps[layout.ravel(levels)] = 1.0
    return StateVector(layout, amps)


def identity(layout: SpaceLayout) -> DenseOperator:
    return DenseOperator(layout, np.eye(layout.dim, dtype=complex), hermitian_hint=True)


def _merged_layout(factors: Sequence[Union[StateVector, DenseOperator]]) -> SpaceLayout:
    subs: list[tuple[str, int]] = []
    seen: set[str] = set()
    for f in factors:
        for label, dim in f.layout.subsystems:
            if label in seen:
                raise ValueError(f"duplicate subsystem label {label!r} across tensor factors")
            seen.add(label)
            subs.append((label, dim))
    return SpaceLayout(tuple(subs))


def tensor(factors: Sequence[Union[StateVector, DenseOperator]]):
    """Kronecker product of states or of operators, in the given order.

    The resulting layout is the concatenation of the factor layouts; factors
    must not share subsystem labels.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("tensor of an empty factor list")
    kinds = {type(f) for f in factors}
    if kinds == {StateVector}:
        layout = _merged_layout(factors)
        amps = factors[0].amplitudes
        for f in factors[1:]:
            amps = np.kron(amps, f.amplitudes)
        return StateVector(layout, amps)
    if kinds == {DenseOperator}:
        layout = _merged_layout(factors)
        entries = factors[0].entries
        for f in factors[1:]:
            entries = np.kron(entries, f.entries)
        hint = all(f.hermitian_hint for f in factors)
        return DenseOperator(layout, entries, hermitian_hint=hint)
    raise TypeError("tensor factors must be all StateVector or all DenseOperator")


def embed(op: DenseOperator, target_label: str, layout: SpaceLayout) -> DenseOperator:
    """Pad a single-subsystem operator with identities into a full layout.

    ``op`` must live on a one-subsystem layout whose dimension equals the
    target subsystem's dimension; the result acts as ``op`` there and as the
    identity everywhere else.
    """
    pos = layout.position(target_label)
    dim = layout.dims[pos]
    if len(op.layout.subsystems) != 1:
        raise ValueError("embed expects an operator on a single subsystem")
    if op.layout.dim != dim:
        raise ValueError(
            f"operator dim {op.layout.dim} != subsystem {target_label!r} dim {dim}"
        )
    entries = np.eye(1, dtype=complex)
    for k, (_, d) in enumerate(layout.subsystems):
        entries = np.kron(entries, op.entries if k == pos else np.eye(d, dtype=complex))
    return DenseOperator(layout, entries, hermitian_hint=op.hermitian_hint)


def overlap_fidelity(psi: StateVector, phi: StateVector) -> float:
    """``|<psi|phi>|^2`` for two normalized states on the same layout.

    Symmetric in its arguments and invariant under a global phase of either
    state.
    """
    if psi.layout != phi.layout:
        raise ValueError("states live on different layouts")
    return float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)


def commutator(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    """``AB - BA``, entry-exact."""
    if a.layout != b.layout:
        raise ValueError("operator layouts differ")
    return DenseOperator(a.layout, a.entries @ b.entries - b.entries @ a.entries)
