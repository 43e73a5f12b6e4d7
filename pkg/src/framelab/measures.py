"""Sampleable probability measures with moment metadata.

Every spec is an immutable value exposing ``dim`` and
``sample_many(m, generator) -> (m, d) array``. Moments use the
probabilistic convention: the frame operator of a measure is
``E[X X^T]``, so a counting measure on ``n`` points carries ``S / n``.

Rejection samplers never evaluate normalizing constants; only density
ratios against a constant envelope are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidSpecError, MissingBudgetError, NotTightError, SamplingError
from .frame_core import FiniteFrame, _operator_power, as_frame, group_closure
from .rng import SeededRng, as_generator

REJECTION_CAP = 1_000_000
UNIT_TOL = 1e-9


def _check_dim(d) -> int:
    if int(d) != d or d < 1:
        raise InvalidSpecError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def _check_radius(r) -> float:
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise InvalidSpecError(f"radius must be positive and finite, got {r!r}")
    return r


def _check_p(p) -> float:
    p = float(p)
    if not p > 0:
        raise InvalidSpecError(f"p must lie in (0, inf], got {p!r}")
    return p


@dataclass(frozen=True)
class UniformSphere:
    d: int
    r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "d", _check_dim(self.d))
        object.__setattr__(self, "r", _check_radius(self.r))

    @property
    def dim(self):
        return self.d

    def sample_many(self, m, gen):
        g = gen.standard_normal((m, self.d))
        return self.r * g / np.linalg.norm(g, axis=1, keepdims=True)


def _generalized_gaussian(gen, m, d, p):
    """Coordinates with density proportional to ``exp(-|t|^p)``."""
    if math.isinf(p):
        return gen.uniform(-1.0, 1.0, (m, d))
    mag = gen.standard_gamma(1.0 / p, (m, d)) ** (1.0 / p)
    sign = 2.0 * gen.integers(0, 2, (m, d)) - 1.0
    return sign * mag


def _lp_norm(x, p):
    if math.isinf(p):
        return np.abs(x).max(axis=1, keepdims=True)
    return (np.abs(x) ** p).sum(axis=1, keepdims=True) ** (1.0 / p)


@dataclass(frozen=True)
class UniformLpSphere:
    """Cone measure on the l_p sphere of radius ``r``.

    For ``p`` in ``{1, 2, inf}`` this coincides with normalized surface
    measure. Either way the law is invariant under coordinate permutations
    and sign flips, which is all tightness needs.
    """

    d: int
    p: float
    r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "d", _check_dim(self.d))
        object.__setattr__(self, "p", _check_p(self.p))
        object.__setattr__(self, "r", _check_radius(self.r))

    @property
    def dim(self):
        return self.d

    def sample_many(self, m, gen):
        g = _generalized_gaussian(gen, m, self.d, self.p)
        return self.r * g / _lp_norm(g, self.p)


@dataclass(frozen=True)
class UniformLpBall:
    """Uniform (Lebesgue) probability measure on the l_p ball of radius ``r``.

    Sampled as cone measure on the sphere times ``U ** (1/d)``, which is
    exact for every ``p`` because volume in the ball factors into cone
    measure and the radial law ``d t^(d-1) dt``.
    """

    d: int
    p: float
    r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "d", _check_dim(self.d))
        object.__setattr__(self, "p", _check_p(self.p))
        object.__setattr__(self, "r", _check_radius(self.r))

    @property
    def dim(self):
        return self.d

    def sample_many(self, m, gen):
        g = _generalized_gaussian(gen, m, self.d, self.p)
        u = gen.uniform(0.0, 1.0, (m, 1))
        return self.r * u ** (1.0 / self.d) * g / _lp_norm(g, self.p)


def _check_funtf(frame) -> FiniteFrame:
    f = as_frame(frame)
    if f.d != 2:
        raise InvalidSpecError("mixture centers must lie on the unit circle in R^2")
    norms = np.linalg.norm(f.vectors, axis=1)
    if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
        raise InvalidSpecError("mixture centers must have unit norm")
    s = f.vectors.T @ f.vectors
    if np.linalg.norm(s - (f.n / 2.0) * np.eye(2)) > UNIT_TOL * max(f.n, 1):
        raise InvalidSpecError("mixture centers must form a tight frame (FUNTF)")
    return f


def _circle_rejection(gen, m, alpha, log_ratio):
    """Angles ``beta`` accepted with probability ``exp(log_ratio(beta - alpha))``."""
    out = np.empty(m)
    todo = np.arange(m)
    rounds = 0
    while todo.size:
        rounds += 1
        if rounds > REJECTION_CAP:
            raise SamplingError(f"rejection sampler exceeded {REJECTION_CAP} rounds")
        beta = gen.uniform(0.0, 2.0 * np.pi, todo.size)
        u = gen.uniform(0.0, 1.0, todo.size)
        ok = np.log(u) <= log_ratio(beta - alpha[todo])
        out[todo[ok]] = beta[ok]
        todo = todo[~ok]
    return np.column_stack([np.cos(out), np.sin(out)])


@dataclass(frozen=True)
class VonMisesMixture:
    """Equal-weight mixture of von Mises laws centred on a FUNTF of the circle.

    Component density is proportional to ``exp(kappa * <x_i, x>)``.
    """

    funtf: FiniteFrame
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "funtf", _check_funtf(self.funtf))
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def dim(self):
        return 2

    @property
    def angles(self):
        v = self.funtf.vectors
        return np.arctan2(v[:, 1], v[:, 0])

    def sample_many(self, m, gen):
        k = self.kappa
        comp = gen.integers(0, self.funtf.n, m)
        return _circle_rejection(gen, m, self.angles[comp], lambda t: k * np.cos(t) - abs(k))


@dataclass(frozen=True)
class WatsonMixture:
    """Equal-weight mixture of Watson laws, density ``exp(kappa * <x_i, x>^2)``."""

    funtf: FiniteFrame
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "funtf", _check_funtf(self.funtf))
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def dim(self):
        return 2

    @property
    def angles(self):
        v = self.funtf.vectors
        return np.arctan2(v[:, 1], v[:, 0])

    def sample_many(self, m, gen):
        k = self.kappa
        top = max(k, 0.0)
        comp = gen.integers(0, self.funtf.n, m)
        return _circle_rejection(gen, m, self.angles[comp], lambda t: k * np.cos(t) ** 2 - top)


@dataclass(frozen=True)
class BernoulliHypercube:
    """i.i.d. coordinates equal to ``+-1/sqrt(d)`` with probability 1/2."""

    d: int

    def __post_init__(self):
        object.__setattr__(self, "d", _check_dim(self.d))

    @property
    def dim(self):
        return self.d

    def sample_many(self, m, gen):
        return (2.0 * gen.integers(0, 2, (m, self.d)) - 1.0) / math.sqrt(self.d)


@dataclass(frozen=True)
class IsotropicGaussian:
    """i.i.d. centred normal coordinates of variance ``1/d``."""

    d: int

    def __post_init__(self):
        object.__setattr__(self, "d", _check_dim(self.d))

    @property
    def dim(self):
        return self.d

    def sample_many(self, m, gen):
        return gen.standard_normal((m, self.d)) / math.sqrt(self.d)


@dataclass(frozen=True)
class DiscreteCounting:
    """Weighted counting measure on the rows of ``frame`` (uniform by default)."""

    frame: FiniteFrame
    weights: Optional[tuple] = None

    def __post_init__(self):
        f = as_frame(self.frame)
        object.__setattr__(self, "frame", f)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (f.n,):
                raise InvalidSpecError(f"{w.size} weights for {f.n} support points")
            if np.any(w < 0) or not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > 1e-12:
                raise InvalidSpecError("weights must be a probability vector")
            object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @property
    def dim(self):
        return self.frame.d

    @property
    def points(self) -> np.ndarray:
        return self.frame.vectors

    @property
    def probabilities(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.frame.n, 1.0 / self.frame.n)
        return np.asarray(self.weights)

    def sample_many(self, m, gen):
        if self.weights is None:
            idx = gen.integers(0, self.frame.n, m)
        else:
            idx = gen.choice(self.frame.n, size=m, p=self.probabilities)
        return self.points[idx]


def point_mass(x) -> DiscreteCounting:
    return DiscreteCounting(FiniteFrame([x]))


@dataclass(frozen=True)
class SignSymmetrized:
    """``(mu(A) + mu(-A)) / 2``: draw from ``base`` and flip the sign w.p. 1/2."""

    base: "MeasureSpec"

    @property
    def dim(self):
        return self.base.dim

    def sample_many(self, m, gen):
        x = self.base.sample_many(m, gen)
        signs = 2.0 * gen.integers(0, 2, (m, 1)) - 1.0
        return signs * x


@dataclass(frozen=True, eq=False)
class GroupSymmetrized:
    """Average of the pushforwards of ``base`` under a finite orthogonal group."""

    base: "MeasureSpec"
    generators: tuple
    group: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        gens = tuple(np.asarray(g, dtype=np.float64) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "group", group_closure(gens, self.base.dim))

    @property
    def dim(self):
        return self.base.dim

    def sample_many(self, m, gen):
        gi = gen.integers(0, len(self.group), m)
        x = self.base.sample_many(m, gen)
        return np.einsum("mij,mj->mi", self.group[gi], x)


MeasureSpec = Union[
    UniformSphere,
    UniformLpSphere,
    UniformLpBall,
    VonMisesMixture,
    WatsonMixture,
    GroupSymmetrized,
    SignSymmetrized,
    BernoulliHypercube,
    IsotropicGaussian,
    DiscreteCounting,
]


def sample(spec, rng: SeededRng | np.random.Generator | None = None) -> np.ndarray:
    """One draw from ``spec``."""
    return spec.sample_many(1, as_generator(rng))[0]


def sample_many(spec, m: int, rng: SeededRng | np.random.Generator | None = None) -> np.ndarray:
    return spec.sample_many(int(m), as_generator(rng))


# ---------------------------------------------------------------------------
# moments


@dataclass
class MomentSummary:
    """Moments of one measure.

    ``fourth_mixed[i, j] = E[X_i^2 X_j^2]``. ``exact`` maps each field name to
    True when it is analytic; ``standard_errors`` holds Monte-Carlo standard
    errors for the estimated fields (same shape as the field).
    """

    L: float
    N: float
    second_moments: np.ndarray
    mean: np.ndarray
    fourth_mixed: Optional[np.ndarray] = None
    exact: dict = field(default_factory=dict)
    standard_errors: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.second_moments.shape[0]

    @property
    def all_exact(self):
        return all(self.exact.get(k, False) for k in ("L", "N", "second_moments"))


FIELDS = ("L", "N", "second_moments", "mean", "fourth_mixed")


def _sphere_fourth(d, r4):
    m = np.full((d, d), r4 / (d * (d + 2)))
    np.fill_diagonal(m, 3 * r4 / (d * (d + 2)))
    return m


def discrete_moments(points: np.ndarray, probs: np.ndarray) -> dict:
    sq = points * points
    norms2 = sq.sum(axis=1)
    s = (points * probs[:, None]).T @ points
    return {
        "L": float(probs @ norms2),
        "N": float(probs @ norms2**2),
        "second_moments": 0.5 * (s + s.T),
        "mean": probs @ points,
        "fourth_mixed": (sq * probs[:, None]).T @ sq,
    }


def _analytic(spec) -> dict:
    """Closed-form moments that are known for ``spec`` (possibly a subset)."""
    d = spec.dim
    eye = np.eye(d)
    zero = np.zeros(d)
    if isinstance(spec, UniformSphere):
        r2 = spec.r**2
        return {"L": r2, "N": r2**2, "second_moments": (r2 / d) * eye, "mean": zero,
                "fourth_mixed": _sphere_fourth(d, r2**2)}
    if isinstance(spec, IsotropicGaussian):
        m4 = np.full((d, d), 1.0 / d**2)
        np.fill_diagonal(m4, 3.0 / d**2)
        return {"L": 1.0, "N": 1.0 + 2.0 / d, "second_moments": eye / d, "mean": zero,
                "fourth_mixed": m4}
    if isinstance(spec, BernoulliHypercube):
        return {"L": 1.0, "N": 1.0, "second_moments": eye / d, "mean": zero,
                "fourth_mixed": np.full((d, d), 1.0 / d**2)}
    if isinstance(spec, DiscreteCounting):
        return discrete_moments(spec.points, spec.probabilities)
    if isinstance(spec, (VonMisesMixture, WatsonMixture)):
        out = {"L": 1.0, "N": 1.0, "second_moments": eye / 2.0}
        if isinstance(spec, WatsonMixture) or np.linalg.norm(spec.funtf.vectors.sum(axis=0)) <= 1e-12:
            out["mean"] = zero
        return out
    if isinstance(spec, (UniformLpSphere, UniformLpBall)):
        if isinstance(spec, UniformLpSphere) and spec.p == 2.0:
            return _analytic(UniformSphere(spec.d, spec.r))
        return {"mean": zero}
    if isinstance(spec, SignSymmetrized):
        out = _analytic(spec.base)
        out["mean"] = zero
        return out
    if isinstance(spec, GroupSymmetrized):
        if isinstance(spec.base, DiscreteCounting):
            return _analytic(expand_group_discrete(spec))
        base = _analytic(spec.base)
        g = spec.group
        out = {k: base[k] for k in ("L", "N") if k in base}
        if "second_moments" in base:
            s = np.einsum("gij,jk,glk->il", g, base["second_moments"], g) / len(g)
            out["second_moments"] = 0.5 * (s + s.T)
        if "mean" in base:
            out["mean"] = np.einsum("gij,j->i", g, base["mean"]) / len(g)
        return out
    raise InvalidSpecError(f"unknown measure spec {type(spec).__name__}")


def expand_group_discrete(spec: GroupSymmetrized) -> DiscreteCounting:
    """Exact counting measure of a group-symmetrized discrete measure."""
    base = spec.base
    g = spec.group
    pts = np.einsum("gij,nj->gni", g, base.points).reshape(-1, spec.dim)
    w = np.tile(base.probabilities, len(g)) / len(g)
    return DiscreteCounting(FiniteFrame(pts), tuple(w / w.sum()))


class _RunningMoments:
    """Chunk-merged mean and sum of squared deviations (Chan et al.)."""

    def __init__(self):
        self.count = 0
        self.mean = None
        self.m2 = None

    def update(self, values):
        k = values.shape[0]
        mu = values.mean(axis=0)
        m2 = ((values - mu) ** 2).sum(axis=0)
        if self.count == 0:
            self.count, self.mean, self.m2 = k, mu, m2
            return
        total = self.count + k
        delta = mu - self.mean
        self.mean = self.mean + delta * (k / total)
        self.m2 = self.m2 + m2 + delta**2 * (self.count * k / total)
        self.count = total

    def stderr(self):
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


MC_CHUNK = 65_536


def _mc_moments(spec, m: int, gen) -> tuple[dict, dict]:
    if m < 2:
        raise ValueError("Monte-Carlo budget must be at least 2")
    d = spec.dim
    acc = {k: _RunningMoments() for k in ("L", "N", "second_moments", "mean", "fourth_mixed", "dev")}
    eye = np.eye(d)
    done = 0
    while done < m:
        k = min(MC_CHUNK, m - done)
        x = spec.sample_many(k, gen)
        sq = x * x
        norms2 = sq.sum(axis=1)
        outer = np.einsum("mi,mj->mij", x, x)
        acc["L"].update(norms2)
        acc["N"].update(norms2**2)
        acc["second_moments"].update(outer)
        acc["mean"].update(x)
        acc["fourth_mixed"].update(np.einsum("mi,mj->mij", sq, sq))
        acc["dev"].update(outer - (norms2 / d)[:, None, None] * eye)
        done += k
    est = {k: acc[k].mean for k in FIELDS}
    se = {k: acc[k].stderr() for k in FIELDS}
    for k in ("L", "N"):
        est[k] = float(est[k])
        se[k] = float(se[k])
    se["tightness"] = float(np.sqrt(np.sum(acc["dev"].stderr() ** 2)))
    return est, se


def moment_summary(spec, mc_budget: Optional[int] = None,
                   rng: SeededRng | np.random.Generator | None = None) -> MomentSummary:
    """Moments of ``spec``, analytic where known and estimated otherwise.

    Without ``mc_budget`` every one of ``L``, ``N``, ``second_moments`` and
    ``mean`` must be analytic, else :class:`MissingBudgetError`;
    ``fourth_mixed`` is then left as None if not analytic. With a budget,
    missing fields are estimated from ``mc_budget`` samples.
    """
    known = _analytic(spec)
    missing = [k for k in FIELDS if k not in known]
    required_missing = [k for k in missing if k != "fourth_mixed"]
    est, se = {}, {}
    if missing and mc_budget is not None:
        est, se = _mc_moments(spec, int(mc_budget), as_generator(rng))
    elif required_missing:
        raise MissingBudgetError(
            f"{type(spec).__name__} has no closed form for {', '.join(required_missing)}; pass mc_budget")
    values = {k: known.get(k, est.get(k)) for k in FIELDS}
    exact = {k: k in known for k in FIELDS if values[k] is not None}
    errors = {k: se[k] for k in missing if k in se}
    if "tightness" in se and "second_moments" in missing:
        errors["tightness"] = se["tightness"]
    return MomentSummary(
        L=float(values["L"]),
        N=float(values["N"]),
        second_moments=np.asarray(values["second_moments"], dtype=np.float64),
        mean=np.asarray(values["mean"], dtype=np.float64),
        fourth_mixed=None if values["fourth_mixed"] is None else np.asarray(values["fourth_mixed"]),
        exact=exact,
        standard_errors=errors,
    )


def tightness_residual(summary: MomentSummary) -> float:
    d = summary.dim
    return float(np.linalg.norm(summary.second_moments - (summary.L / d) * np.eye(d)))


def is_probabilistic_tight(spec, tol: float = 1e-10, mc_budget: Optional[int] = None,
                           rng: SeededRng | np.random.Generator | None = None) -> bool:
    """``||E[XX^T] - (L/d) I||_F <= tol``, widened by 3 standard errors when estimated."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    summary = moment_summary(spec, mc_budget, rng)
    band = tol + 3.0 * summary.standard_errors.get("tightness", 0.0)
    return tightness_residual(summary) <= band


def tight_bound(spec, tol: float = 1e-10, mc_budget: Optional[int] = None,
                rng: SeededRng | np.random.Generator | None = None) -> float:
    """The tight frame bound ``L / d``."""
    summary = moment_summary(spec, mc_budget, rng)
    band = tol + 3.0 * summary.standard_errors.get("tightness", 0.0)
    if tightness_residual(summary) > band:
        raise NotTightError(f"{type(spec).__name__} is not a probabilistic tight frame")
    return summary.L / summary.dim


def sign_symmetrize(spec) -> SignSymmetrized:
    return spec if isinstance(spec, SignSymmetrized) else SignSymmetrized(spec)


def group_symmetrize(base, generators: Sequence) -> GroupSymmetrized:
    return GroupSymmetrized(base, tuple(generators))


def canonical_dual_measure(spec: DiscreteCounting) -> DiscreteCounting:
    """Counting measure on ``S^{-1} x_i`` with ``S = E[X X^T]``; weights kept."""
    if not isinstance(spec, DiscreteCounting):
        raise InvalidSpecError("canonical dual is only available for discrete measures")
    s = discrete_moments(spec.points, spec.probabilities)["second_moments"]
    s_inv = _operator_power(s, -1.0)
    return DiscreteCounting(FiniteFrame(spec.points @ s_inv), spec.weights)
