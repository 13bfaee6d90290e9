"""Primitive qutrit and bosonic-mode matrices.

Qutrit level convention used everywhere: index 0 = |i>, 1 = |g>, 2 = |e>.
The two ground levels |i>, |g> carry qubit information; |e> is the excited
level.  sigma^z, sigma^+/- act on the {|g>, |e>} pair and vanish on |i>.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LVL_I",
    "LVL_G",
    "LVL_E",
    "QUTRIT_LEVELS",
    "level_index",
    "projector",
    "transition",
    "sigma_z",
    "sigma_plus",
    "sigma_minus",
    "annihilation",
    "creation",
    "number_op",
    "two_level_rotation",
]

LVL_I, LVL_G, LVL_E = 0, 1, 2
QUTRIT_LEVELS = {"i": LVL_I, "g": LVL_G, "e": LVL_E}


def level_index(level: "str | int") -> int:
    if isinstance(level, str):
        try:
            return QUTRIT_LEVELS[level]
        except KeyError:
            raise ValueError(f"unknown qutrit level {level!r}; expected one of i, g, e")
    if level in (LVL_I, LVL_G, LVL_E):
        return int(level)
    raise ValueError(f"qutrit level index {level} out of range")


def projector(level: "str | int", dim: int = 3) -> np.ndarray:
    k = level_index(level) if dim == 3 else int(level)
    m = np.zeros((dim, dim), dtype=complex)
    m[k, k] = 1.0
    return m


def transition(upper: "str | int", lower: "str | int") -> np.ndarray:
    """|upper><lower| on the qutrit."""
    m = np.zeros((3, 3), dtype=complex)
    m[level_index(upper), level_index(lower)] = 1.0
    return m


def sigma_z() -> np.ndarray:
    """|e><e| - |g><g| (zero on |i>)."""
    return projector("e") - projector("g")


def sigma_plus() -> np.ndarray:
    """|e><g|."""
    return transition("e", "g")


def sigma_minus() -> np.ndarray:
    """|g><e|."""
    return transition("g", "e")


def annihilation(dim: int) -> np.ndarray:
    """Truncated boson annihilation operator, a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def two_level_rotation(dim: int, u: int, v: int, theta: float, phase: float) -> np.ndarray:
    """Identity except on the (u, v) pair:

    |u> -> cos(theta)|u> - i e^{-i phase} sin(theta)|v>
    |v> -> cos(theta)|v> - i e^{+i phase} sin(theta)|u>
    """
    if u == v:
        raise ValueError("rotation levels must be distinct")
    m = np.eye(dim, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    m[u, u] = c
    m[v, v] = c
    m[v, u] = -1j * np.exp(-1j * phase) * s
    m[u, v] = -1j * np.exp(1j * phase) * s
    return m
