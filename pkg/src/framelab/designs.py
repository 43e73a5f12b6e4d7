"""Probabilistic spherical 2-designs.

A probability measure on the unit sphere is a 2-design exactly when its
mean vanishes and its second-moment matrix is ``I/d``; equivalently it
minimizes the mixed potential

    E<X, Y>^2 / E||X - Y||^2     (X, Y independent draws)

whose minimum value is ``1/(2d)``. On the sphere the denominator equals
``2 - 2 ||E X||^2``.

Finitely supported measures (counting measures and their sign or group
symmetrizations) are checked with exact sums; everything else by
Monte-Carlo with standard-error bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateMeasureError,
    MissingBudgetError,
    NonSphericalSupportError,
    NotTightError,
)
from .frame_core import FiniteFrame
from .measures import (
    BernoulliHypercube,
    DiscreteCounting,
    GroupSymmetrized,
    SignSymmetrized,
    UniformLpSphere,
    UniformSphere,
    VonMisesMixture,
    WatsonMixture,
    expand_group_discrete,
    is_probabilistic_tight,
    sign_symmetrize,
)
from .montecarlo import Estimate, pair_ratio_stderr
from .rng import SeededRng, as_generator

SPHERE_TOL = 1e-9
EXACT_TOL = 1e-10
SE_BAND = 5.0


def as_discrete(source) -> Optional[DiscreteCounting]:
    """Exact counting-measure form of a finitely supported source, else None."""
    if isinstance(source, FiniteFrame):
        return DiscreteCounting(source)
    if isinstance(source, DiscreteCounting):
        return source
    if isinstance(source, SignSymmetrized):
        base = as_discrete(source.base)
        if base is None:
            return None
        pts = np.concatenate([base.points, -base.points])
        w = np.concatenate([base.probabilities, base.probabilities]) / 2.0
        return DiscreteCounting(FiniteFrame(pts), tuple(w / w.sum()))
    if isinstance(source, GroupSymmetrized):
        base = as_discrete(source.base)
        if base is None:
            return None
        return expand_group_discrete(GroupSymmetrized(base, source.generators))
    return None


def _check_sphere(points: np.ndarray, weights: Optional[np.ndarray] = None):
    norms = np.linalg.norm(points, axis=1)
    live = np.ones(len(points), bool) if weights is None else weights > 0
    if np.any(np.abs(norms[live] - 1.0) > SPHERE_TOL):
        raise NonSphericalSupportError("support is not contained in the unit sphere")


@dataclass
class DesignReport:
    mean: np.ndarray
    second_moments: np.ndarray
    mean_residual: float
    moment_residual: float
    mean_threshold: float
    moment_threshold: float
    verdict: bool
    exact: bool
    samples: int = 0
    mean_stderr: Optional[np.ndarray] = None
    moment_stderr: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "mean": self.mean.tolist(),
            "second_moments": self.second_moments.tolist(),
            "mean_residual": self.mean_residual,
            "moment_residual": self.moment_residual,
            "mean_threshold": self.mean_threshold,
            "moment_threshold": self.moment_threshold,
            "exact": self.exact,
            "samples": self.samples,
            "verdict": self.verdict,
        }
        if self.mean_stderr is not None:
            out["mean_stderr"] = self.mean_stderr.tolist()
            out["moment_stderr"] = self.moment_stderr.tolist()
        return out


def _sample_sphere(source, mc_budget, rng) -> np.ndarray:
    if mc_budget is None:
        raise MissingBudgetError("sampled sources need an mc_budget")
    if mc_budget < 2:
        raise ValueError("mc_budget must be at least 2")
    y = source.sample_many(int(mc_budget), as_generator(rng))
    _check_sphere(y)
    return y


def design_check(source, tol: float = EXACT_TOL, mc_budget: Optional[int] = None,
                 rng: SeededRng | np.random.Generator | None = None,
                 se_band: float = SE_BAND) -> DesignReport:
    """Test ``E X = 0`` and ``E X X^T = I/d`` for a measure on the unit sphere.

    Finitely supported sources are decided exactly with threshold ``tol``.
    Other sources are sampled ``mc_budget`` times and each residual is
    compared with ``se_band`` times the root-sum-square of its entrywise
    standard errors.
    """
    disc = as_discrete(source)
    if disc is not None:
        pts, w = disc.points, disc.probabilities
        _check_sphere(pts, w)
        d = pts.shape[1]
        mean = w @ pts
        second = (pts * w[:, None]).T @ pts
        second = 0.5 * (second + second.T)
        mres = float(np.linalg.norm(mean))
        sres = float(np.linalg.norm(second - np.eye(d) / d))
        return DesignReport(mean, second, mres, sres, tol, tol, mres <= tol and sres <= tol, True)

    y = _sample_sphere(source, mc_budget, rng)
    m, d = y.shape
    rt = math.sqrt(m)
    mean = y.mean(axis=0)
    mean_se = y.std(axis=0, ddof=1) / rt
    outer = np.einsum("mi,mj->ij", y, y) / m
    # entrywise variance of x_i x_j without forming the (m, d, d) tensor
    sq = y * y
    var = (sq.T @ sq) / m - outer**2
    moment_se = np.sqrt(np.maximum(var, 0.0) * m / (m - 1)) / rt
    mres = float(np.linalg.norm(mean))
    sres = float(np.linalg.norm(outer - np.eye(d) / d))
    mthr = se_band * float(np.sqrt(np.sum(mean_se**2)))
    sthr = se_band * float(np.sqrt(np.sum(moment_se**2)))
    return DesignReport(mean, outer, mres, sres, mthr, sthr, mres <= mthr and sres <= sthr,
                        False, m, mean_se, moment_se)


def mixed_potential(source, mc_budget: Optional[int] = None,
                    rng: SeededRng | np.random.Generator | None = None) -> Estimate:
    """``E<X,Y>^2 / E||X-Y||^2`` with the denominator as ``2 - 2||E X||^2``.

    Exact (zero standard error) for finitely supported sources; otherwise a
    ratio of unbiased U-statistics from ``mc_budget`` draws.
    """
    disc = as_discrete(source)
    if disc is not None:
        pts, w = disc.points, disc.probabilities
        _check_sphere(pts, w)
        g = pts @ pts.T
        num = float(w @ (g * g) @ w)
        mean = w @ pts
        den = 2.0 - 2.0 * float(mean @ mean)
        if den <= 1e-12:
            raise DegenerateMeasureError("E||X - Y||^2 vanishes (point mass)")
        return Estimate(num / den, 0.0)

    y = _sample_sphere(source, mc_budget, rng)
    m = y.shape[0]
    norms2 = np.sum(y * y, axis=1)
    gram = y.T @ y
    total = y.sum(axis=0)
    u_sq = (float(np.sum(gram * gram)) - float(np.sum(norms2**2))) / (m * (m - 1))
    u_dot = (float(total @ total) - float(norms2.sum())) / (m * (m - 1))
    den = 2.0 - 2.0 * u_dot
    if den <= 1e-12:
        raise DegenerateMeasureError("E||X - Y||^2 vanishes (point mass)")
    ratio = u_sq / den
    mean = total / m
    s_hat = gram / m
    h_sq = np.einsum("mi,ij,mj->m", y, s_hat, y)
    h_dist = norms2 + float(norms2.mean()) - 2.0 * (y @ mean)
    g1 = (h_sq - ratio * h_dist) / den
    a, b = y[0 : m - 1 : 2], y[1:m:2]
    k = min(len(a), len(b))
    a, b = a[:k], b[:k]
    pair = (np.sum(a * b, axis=1) ** 2 - ratio * np.sum((a - b) ** 2, axis=1)) / den
    return Estimate(ratio, pair_ratio_stderr(g1, pair, m))


def _unit_norm_support(spec) -> Optional[bool]:
    if isinstance(spec, (VonMisesMixture, WatsonMixture, BernoulliHypercube)):
        return True
    if isinstance(spec, UniformSphere):
        return spec.r == 1.0
    if isinstance(spec, UniformLpSphere):
        return spec.p == 2.0 and spec.r == 1.0
    if isinstance(spec, (SignSymmetrized, GroupSymmetrized)):
        return _unit_norm_support(spec.base)
    disc = as_discrete(spec)
    if disc is not None:
        live = disc.probabilities > 0
        return bool(np.all(np.abs(np.linalg.norm(disc.points[live], axis=1) - 1.0) <= SPHERE_TOL))
    return None


def design_from_puntf(spec, tol: float = EXACT_TOL, mc_budget: Optional[int] = None,
                      rng: SeededRng | np.random.Generator | None = None):
    """Sign-symmetrize a probabilistic unit norm tight frame into a 2-design."""
    unit = _unit_norm_support(spec)
    if unit is None:
        y = spec.sample_many(1000, as_generator(rng))
        unit = bool(np.all(np.abs(np.linalg.norm(y, axis=1) - 1.0) <= SPHERE_TOL))
    if not unit:
        raise NonSphericalSupportError("input measure is not supported on the unit sphere")
    if not is_probabilistic_tight(spec, tol, mc_budget, rng):
        raise NotTightError("input measure is not a probabilistic tight frame")
    return sign_symmetrize(spec)
