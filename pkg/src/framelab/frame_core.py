"""Finite frames in R^d.

Conventions
-----------
The frame operator here is always the unnormalized ``S = sum_i x_i x_i^T``.
The probabilistic operator of the normalized counting measure is ``S / n``;
pass ``normalized=True`` to :func:`frame_operator` to get it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatchError,
    GroupClosureError,
    NotParsevalError,
    NumericalError,
    SingularFrameError,
)

SINGULAR_RTOL = 1e-12
DEDUP_TOL = 1e-9
GROUP_CAP = 10_000


class FiniteFrame:
    """An ordered, immutable collection of ``n`` vectors in ``R^d``."""

    __slots__ = ("_v",)

    def __init__(self, vectors):
        v = np.array(vectors, dtype=np.float64, copy=True)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DimensionMismatchError(f"expected an n x d array with n, d >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NumericalError("frame vectors must be finite")
        v.flags.writeable = False
        self._v = v

    @property
    def vectors(self) -> np.ndarray:
        """Read-only ``(n, d)`` array, one vector per row."""
        return self._v

    @property
    def n(self) -> int:
        return self._v.shape[0]

    @property
    def d(self) -> int:
        return self._v.shape[1]

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self._v)

    def __array__(self, dtype=None, copy=None):
        return self._v if dtype is None else self._v.astype(dtype)

    def __eq__(self, other):
        return isinstance(other, FiniteFrame) and np.array_equal(self._v, other._v)

    def __hash__(self):
        return hash((self._v.shape, self._v.tobytes()))

    def __repr__(self):
        return f"FiniteFrame(n={self.n}, d={self.d})"


def as_frame(frame) -> FiniteFrame:
    return frame if isinstance(frame, FiniteFrame) else FiniteFrame(frame)


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order; eigenvectors are the matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def mercedes_benz() -> FiniteFrame:
    """The three-vector FUNTF of R^2 at angles 0, 2pi/3, 4pi/3."""
    h = np.sqrt(3.0) / 2.0
    return FiniteFrame([[1.0, 0.0], [-0.5, h], [-0.5, -h]])


def analysis_apply(frame, x) -> np.ndarray:
    f = as_frame(frame)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (f.d,):
        raise DimensionMismatchError(f"vector of length {x.shape} for frame of dimension {f.d}")
    return f.vectors @ x


def synthesis_apply(frame, c) -> np.ndarray:
    f = as_frame(frame)
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (f.n,):
        raise DimensionMismatchError(f"{c.shape[0] if c.ndim else 0} coefficients for {f.n} frame vectors")
    return c @ f.vectors


def frame_operator(frame, normalized: bool = False) -> np.ndarray:
    """``sum_i x_i x_i^T``, or that divided by ``n`` when ``normalized``.

    The result is symmetrized so that ``S[i, j] == S[j, i]`` exactly.
    """
    v = as_frame(frame).vectors
    s = v.T @ v
    s = 0.5 * (s + s.T)
    if normalized:
        s /= v.shape[0]
    return s


def to_probabilistic_operator(s: np.ndarray, n: int) -> np.ndarray:
    """Convert an unnormalized frame operator to the counting-measure convention."""
    return np.asarray(s, dtype=np.float64) / n


def eig_sym(m) -> EigenDecomposition:
    """Symmetric eigendecomposition by cyclic Jacobi.

    Stops once the off-diagonal Frobenius mass is below ``1e-13 * ||m||_F``
    or after 100 sweeps.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    scale = np.abs(a).max(initial=0.0)
    if np.abs(a - a.T).max(initial=0.0) > 1e-12 * max(scale, 1.0):
        raise NumericalError("matrix is not symmetric")
    a = np.ascontiguousarray(0.5 * (a + a.T))
    w, v, sweeps = kernels.jacobi_eigh(a, 1e-13, 100)
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], np.ascontiguousarray(v[:, order]), sweeps)


def frame_bounds(frame) -> FrameBounds:
    w = eig_sym(frame_operator(frame)).eigenvalues
    lower = max(float(w[-1]), 0.0)
    upper = max(float(w[0]), lower)
    return FrameBounds(lower, upper)


def is_tight(frame, tol: float = 1e-10) -> tuple[bool, float]:
    """Return ``(flag, A)`` with ``A = trace(S)/d``, the closest multiple of I."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = frame_operator(frame)
    d = s.shape[0]
    a = float(np.trace(s)) / d
    return bool(np.linalg.norm(s - a * np.eye(d)) <= tol), a


def _operator_power(s: np.ndarray, power: float) -> np.ndarray:
    eig = eig_sym(s)
    w = eig.eigenvalues
    if w[0] <= 0 or w[-1] <= SINGULAR_RTOL * w[0]:
        raise SingularFrameError("frame operator is singular; the vectors do not span R^d")
    v = eig.eigenvectors
    return (v * w**power) @ v.T


def canonical_dual(frame) -> FiniteFrame:
    f = as_frame(frame)
    s_inv = _operator_power(frame_operator(f), -1.0)
    return FiniteFrame(f.vectors @ s_inv)


def to_parseval(frame) -> FiniteFrame:
    f = as_frame(frame)
    p = f.vectors @ _operator_power(frame_operator(f), -0.5)
    # one refinement pass: the new operator is close to I, so well conditioned
    return FiniteFrame(p @ _operator_power(frame_operator(p), -0.5))


def frame_potential(frame) -> float:
    v = as_frame(frame).vectors
    g = v @ v.T
    return float(np.sum(g * g))


def waldron_ratio(frame) -> float:
    """Frame potential over ``(sum ||x_i||^2)^2``; at least ``1/d`` when ``n >= d``."""
    v = as_frame(frame).vectors
    energy = float(np.sum(v * v))
    if energy == 0.0:
        raise NumericalError("all frame vectors are zero")
    return frame_potential(v) / energy**2


def fundamental_identity(parseval, subset: Iterable[int], x) -> tuple[float, float, float]:
    """Both sides of the Parseval-frame subset identity and the 3/4 bound.

    Returns ``(lhs, rhs, ineq_value)`` where, with ``c_i = <x, x_i>``,

    * ``lhs = sum_J c_i^2 - ||sum_J c_i x_i||^2``
    * ``rhs`` is the same over the complement of ``J``
    * ``ineq_value = sum_J c_i^2 + ||sum_{J^c} c_i x_i||^2 >= (3/4)||x||^2``

    ``subset`` holds zero-based indices.
    """
    f = as_frame(parseval)
    s = frame_operator(f)
    if np.linalg.norm(s - np.eye(f.d)) > 1e-8:
        raise NotParsevalError("frame operator differs from the identity by more than 1e-8")
    mask = np.zeros(f.n, dtype=bool)
    idx = list(subset)
    if idx:
        idx = np.asarray(idx, dtype=int)
        if idx.min() < 0 or idx.max() >= f.n:
            raise IndexError("subset index out of range")
        mask[idx] = True
    c = analysis_apply(f, x)
    v = f.vectors
    energy_j = float(np.sum(c[mask] ** 2))
    energy_c = float(np.sum(c[~mask] ** 2))
    synth_j = c[mask] @ v[mask]
    synth_c = c[~mask] @ v[~mask]
    lhs = energy_j - float(synth_j @ synth_j)
    rhs = energy_c - float(synth_c @ synth_c)
    return lhs, rhs, energy_j + float(synth_c @ synth_c)


def _check_orthogonal(g: np.ndarray, d: int) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (d, d):
        raise DimensionMismatchError(f"generator of shape {g.shape} in dimension {d}")
    if np.linalg.norm(g.T @ g - np.eye(d)) > 1e-10:
        raise GroupClosureError("generator is not orthogonal")
    return g


def group_closure(generators: Sequence, d: int, cap: int = GROUP_CAP) -> np.ndarray:
    """All elements of the finite group generated by ``generators``.

    Returns a ``(|G|, d, d)`` array whose first element is the identity.
    Elements closer than ``1e-9`` (Frobenius) are identified.
    """
    gens = [_check_orthogonal(g, d) for g in generators]
    elems = [np.eye(d)]
    stack = np.eye(d)[None]
    frontier = [np.eye(d)]
    while frontier:
        new = []
        for h in frontier:
            for g in gens:
                cand = g @ h
                dist = np.sqrt(np.sum((stack - cand) ** 2, axis=(1, 2)))
                if dist.min() <= DEDUP_TOL:
                    continue
                elems.append(cand)
                stack = np.concatenate([stack, cand[None]])
                new.append(cand)
                if len(elems) > cap:
                    raise GroupClosureError(f"group closure exceeds {cap} elements")
        frontier = new
    return stack


def dedup_rows(v: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    kept: list[np.ndarray] = []
    for row in v:
        if not kept or np.min(np.linalg.norm(np.asarray(kept) - row, axis=1)) > tol:
            kept.append(row)
    return np.asarray(kept)


def group_orbit_frame(generators: Sequence, x0, cap: int = GROUP_CAP) -> FiniteFrame:
    """Orbit ``{g x0 : g in G}`` of the group generated by ``generators``.

    Irreducible groups give tight frames.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if not np.any(x0):
        raise NumericalError("x0 must be nonzero")
    group = group_closure(generators, x0.shape[0], cap)
    return FiniteFrame(dedup_rows(group @ x0))


def rotation2(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])
