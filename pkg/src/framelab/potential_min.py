"""Frame-potential minimization over ``n`` points of the unit sphere.

Projected (Riemannian) gradient descent: step along the negative tangential
gradient, then renormalize each vector back onto the sphere. The step is
chosen by Armijo backtracking starting from ``1/(8n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalError
from .frame_core import FiniteFrame, as_frame, frame_operator, frame_potential
from .measures import UniformSphere
from .rng import SeededRng

UNIT_TOL = 1e-8


@dataclass(frozen=True)
class DescentConfig:
    n: int
    d: int
    max_iters: int = 20_000
    step: Optional[float] = None  # None selects 1/(8n)
    backtracking: bool = True
    shrink: float = 0.5
    armijo: float = 1e-4
    grad_tol: float = 1e-11
    seed: int = 0
    reseed_on_stall: bool = True

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")

    @property
    def initial_step(self) -> float:
        return self.step if self.step is not None else 1.0 / (8.0 * self.n)


@dataclass
class DescentTrace:
    fp_values: list
    grad_norms: list
    frame: FiniteFrame
    grad_norm: float
    iterations: int
    converged: bool
    stalled: bool = False
    reseeds: int = 0
    seed_stream: int = 0
    history: list = field(default_factory=list, repr=False)

    @property
    def final_fp(self) -> float:
        return self.fp_values[-1]


def theoretical_min_fp(n: int, d: int) -> float:
    """``n`` for ``n <= d`` (orthonormal systems), else ``n^2/d`` (FUNTFs)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    return float(n) if n <= d else n * n / d


def _unit_rows(frame) -> np.ndarray:
    v = as_frame(frame).vectors
    if np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0)) > UNIT_TOL:
        raise NumericalError("frame vectors must have unit norm")
    return v


def fp_gradient(frame, tangential: bool = False) -> np.ndarray:
    """Gradient of the frame potential, one row ``4 sum_j <x_k, x_j> x_j`` per vector.

    With ``tangential=True`` each row is projected onto the tangent space of
    the sphere at ``x_k``.
    """
    v = _unit_rows(frame)
    g = 4.0 * (v @ v.T) @ v
    if tangential:
        g = g - np.sum(g * v, axis=1, keepdims=True) * v
    return g


def _excess(v: np.ndarray) -> tuple[float, np.ndarray]:
    """Frame potential minus ``n^2/d`` (``n >= d``) or minus ``n`` (``n < d``).

    Returns the excess and a matrix ``C`` whose tangential part of
    ``4 V C`` (``n >= d``) or ``4 C V`` (``n < d``) is the Riemannian
    gradient. Working with the excess keeps full relative precision near
    the minimum, where the potential itself is dominated by the constant.
    Valid for unit vectors only.
    """
    n, d = v.shape
    if n >= d:
        c = v.T @ v
        c[np.diag_indices_from(c)] -= n / d
    else:
        c = v @ v.T
        c[np.diag_indices_from(c)] -= 1.0
    return float(np.sum(c * c)), c


def _retract(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _descend(v: np.ndarray, cfg: DescentConfig):
    n, d = v.shape
    base = theoretical_min_fp(n, d)
    wide = n >= d
    ex, centred = _excess(v)
    fps, grads = [base + ex], []
    it = 0
    converged = False
    while True:
        # the dropped multiple of I contributes only a normal component
        g = 4.0 * (v @ centred if wide else centred @ v)
        g -= np.sum(g * v, axis=1, keepdims=True) * v
        gn2 = float(np.sum(g * g))
        gnorm = gn2**0.5
        grads.append(gnorm)
        if gnorm <= cfg.grad_tol:
            converged = True
            break
        if it >= cfg.max_iters:
            break
        t = cfg.initial_step
        while True:
            cand = _retract(v - t * g)
            cand_ex, cand_centred = _excess(cand)
            if not cfg.backtracking or cand_ex <= ex - cfg.armijo * t * gn2:
                break
            t *= cfg.shrink
            if t < 1e-20:
                cand = None
                break
        if cand is None:
            # no representable decrease left
            break
        v, ex, centred = cand, cand_ex, cand_centred
        fps.append(base + ex)
        it += 1
    return v, fps, grads, it, converged


def minimize_fp(config: DescentConfig, initial=None) -> DescentTrace:
    """Minimize the frame potential of ``n`` unit vectors in ``R^d``.

    Starts from i.i.d. uniform points on the sphere drawn from stream 0 of
    ``config.seed`` unless ``initial`` is given. A run that stops on the
    gradient tolerance with potential more than ``1e-6`` above the known
    minimum is flagged as stalled and, if ``reseed_on_stall``, restarted
    once from stream 1.
    """
    n, d = config.n, config.d
    stream = 0
    if initial is None:
        v = UniformSphere(d).sample_many(n, SeededRng(config.seed, stream).generator)
    else:
        v = _retract(np.array(as_frame(initial).vectors, dtype=np.float64))
        if v.shape != (n, d):
            raise ValueError(f"initial frame has shape {v.shape}, expected {(n, d)}")
    target = theoretical_min_fp(n, d)
    history = []
    reseeds = 0
    while True:
        v, fps, grads, it, converged = _descend(v, config)
        stalled = fps[-1] - target > 1e-6
        trace = DescentTrace(fps, grads, FiniteFrame(v), grads[-1], it, converged, stalled, reseeds, stream)
        if not (stalled and config.reseed_on_stall and reseeds == 0 and initial is None):
            trace.history = history
            return trace
        history.append(trace)
        reseeds += 1
        stream += 1
        v = UniformSphere(d).sample_many(n, SeededRng(config.seed, stream).generator)


@dataclass(frozen=True)
class Certificate:
    fp: float
    theoretical_min: float
    fp_gap: float
    structure_residual: float
    passed: bool
    kind: str

    def to_dict(self) -> dict:
        return {
            "fp": self.fp,
            "theoretical_min": self.theoretical_min,
            "fp_gap": self.fp_gap,
            "structure_residual": self.structure_residual,
            "kind": self.kind,
            "passed": self.passed,
        }


def certify_minimizer(frame, tol: float = 1e-8) -> Certificate:
    """Check a unit-norm frame against the known minimizers.

    For ``n >= d`` the structural residual is ``||S - (n/d) I||_F``; for
    ``n < d`` it is ``||G - I||_F`` with ``G`` the Gram matrix (pairwise
    orthogonality). Passes when both the value gap and the residual are at
    most ``tol``.
    """
    v = _unit_rows(frame)
    n, d = v.shape
    fp = frame_potential(v)
    target = theoretical_min_fp(n, d)
    if n >= d:
        resid = float(np.linalg.norm(frame_operator(v) - (n / d) * np.eye(d)))
        kind = "funtf"
    else:
        resid = float(np.linalg.norm(v @ v.T - np.eye(n)))
        kind = "orthonormal"
    gap = abs(fp - target)
    return Certificate(fp, target, gap, resid, gap <= tol and resid <= tol, kind)
