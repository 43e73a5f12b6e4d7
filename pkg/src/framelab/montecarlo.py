"""Random-frame experiments against exact mean-squared Frobenius error laws.

For independent ``X_k ~ mu_k`` with second-moment matrices ``S_k`` and
``N_k = E||X_k||^4``, the summands ``X_k X_k^T - S_k`` are independent and
centred, so

    E || (1/n) sum_k X_k X_k^T - (1/n) sum_k S_k ||_F^2
        = (1/n^2) sum_k (N_k - ||S_k||_F^2)
        = (1/n) (N - ||S~||_1),

where ``S~[i, j] = (1/n) sum_k S_k[i, j]^2``. For tight ``S_k = (L_k/d) I``
this is ``(1/n)(N - L~/d)`` and entrywise ``(1/n)(M[i, j] - L~/d^2 delta_ij)``.

Trial ``t`` of every experiment draws from stream ``t`` of the experiment
seed and results are reduced in trial order, so the outcome does not depend
on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    DegenerateMeasureError,
    DimensionMismatchError,
    MissingBudgetError,
    NotTightError,
)
from .measures import DiscreteCounting, MomentSummary, moment_summary, tightness_residual
from .rng import SeededRng, as_generator

SCALED_IDENTITY = "scaled_identity"
MIXED_OPERATOR = "mixed_operator"
TARGETS = (SCALED_IDENTITY, MIXED_OPERATOR)

# streams at and above this index are reserved for moment estimation
MOMENT_STREAM_BASE = 1 << 62


class Estimate(NamedTuple):
    value: float
    stderr: float


def _tight(summary: MomentSummary, tol: float = 1e-10) -> bool:
    band = tol + 3.0 * summary.standard_errors.get("tightness", 0.0)
    return tightness_residual(summary) <= band


def _broadcast(summaries, n):
    summaries = list(summaries)
    if len(summaries) == 1 and n > 1:
        summaries = summaries * n
    if len(summaries) != n:
        raise DimensionMismatchError(f"{len(summaries)} moment summaries for n={n}")
    return summaries


def closed_form_error(summaries: Sequence[MomentSummary], n: int, d: int) -> float:
    """``(1/n)(N - L~/d)`` for independent draws from tight measures.

    ``summaries`` holds one entry per index ``k`` or a single entry shared
    by all ``n`` draws.
    """
    summaries = _broadcast(summaries, n)
    for s in summaries:
        if s.dim != d:
            raise DimensionMismatchError(f"measure of dimension {s.dim}, expected {d}")
        if not _tight(s):
            raise NotTightError("closed_form_error needs probabilistic tight frames")
    big_n = sum(s.N for s in summaries) / n
    l_tilde = sum(s.L**2 for s in summaries) / n
    return (big_n - l_tilde / d) / n


def per_entry_error(summaries: Sequence[MomentSummary], n: int, d: int) -> np.ndarray:
    """Entrywise ``(1/n)(M[i, j] - (L~/d^2) delta_ij)``; sums to :func:`closed_form_error`."""
    summaries = _broadcast(summaries, n)
    for s in summaries:
        if not _tight(s):
            raise NotTightError("per_entry_error needs probabilistic tight frames")
        if s.fourth_mixed is None:
            raise MissingBudgetError("fourth mixed moments are unavailable; estimate them with mc_budget")
    m_bar = sum(s.fourth_mixed for s in summaries) / n
    l_tilde = sum(s.L**2 for s in summaries) / n
    return (m_bar - (l_tilde / d**2) * np.eye(d)) / n


@dataclass
class GeneralMomentBundle:
    """Per-index second-moment matrices ``S_k`` and fourth moments ``N_k``."""

    S: list
    N: list

    @classmethod
    def from_summaries(cls, summaries: Sequence[MomentSummary]) -> "GeneralMomentBundle":
        return cls([np.asarray(s.second_moments) for s in summaries], [float(s.N) for s in summaries])

    @property
    def n(self) -> int:
        return len(self.S)

    @property
    def S_bar(self) -> np.ndarray:
        return sum(self.S) / self.n

    @property
    def S_tilde(self) -> np.ndarray:
        return sum(s * s for s in self.S) / self.n

    @property
    def S_tilde_l1(self) -> float:
        return float(np.abs(self.S_tilde).sum())

    @property
    def N_bar(self) -> float:
        return sum(self.N) / self.n


def closed_form_error_general(bundle: GeneralMomentBundle, n: Optional[int] = None) -> float:
    """``(1/n)(N - ||S~||_1)``: error against the mixed operator ``S_bar``.

    ``bundle`` may hold a single measure shared by all ``n`` draws.
    """
    if n is None:
        n = bundle.n
    if bundle.n == 1 and n > 1:
        bundle = GeneralMomentBundle(bundle.S * n, bundle.N * n)
    if bundle.n != n:
        raise DimensionMismatchError(f"bundle holds {bundle.n} measures for n={n}")
    return (bundle.N_bar - bundle.S_tilde_l1) / n


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ConvergenceExperiment:
    specs: list
    trials: int
    target: str = SCALED_IDENTITY
    seed: int = 0
    workers: int = 1
    mc_budget: int = 100_000

    def __post_init__(self):
        self.specs = list(self.specs)
        if not self.specs:
            raise ValueError("an experiment needs at least one spec")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")
        dims = {s.dim for s in self.specs}
        if len(dims) != 1:
            raise DimensionMismatchError(f"specs have differing dimensions {sorted(dims)}")

    @property
    def n(self) -> int:
        return len(self.specs)

    @property
    def d(self) -> int:
        return self.specs[0].dim


@dataclass
class ExperimentResult:
    n: int
    d: int
    trials: int
    empirical_mse: float
    closed_form: float
    standard_error: float
    per_entry_empirical: np.ndarray
    per_entry_closed_form: Optional[np.ndarray]
    per_entry_standard_error: np.ndarray
    trial_errors: np.ndarray = field(repr=False)

    @property
    def z_score(self) -> float:
        if self.standard_error == 0.0:
            return 0.0 if self.empirical_mse == self.closed_form else math.inf
        return (self.empirical_mse - self.closed_form) / self.standard_error

    def within(self, k: float = 5.0) -> bool:
        return abs(self.empirical_mse - self.closed_form) <= k * self.standard_error

    def to_dict(self) -> dict:
        pe = self.per_entry_closed_form
        return {
            "n": self.n,
            "d": self.d,
            "trials": self.trials,
            "empirical_mse": self.empirical_mse,
            "standard_error": self.standard_error,
            "closed_form": self.closed_form,
            "per_entry_empirical": self.per_entry_empirical.tolist(),
            "per_entry_standard_error": self.per_entry_standard_error.tolist(),
            "per_entry_closed_form": None if pe is None else pe.tolist(),
        }


def _summaries_for(exp: ConvergenceExperiment) -> list:
    cache = {}
    out = []
    for k, spec in enumerate(exp.specs):
        key = id(spec)
        if key not in cache:
            try:
                cache[key] = moment_summary(spec)
                if cache[key].fourth_mixed is None:
                    raise MissingBudgetError("no analytic fourth moments")
            except MissingBudgetError:
                rng = SeededRng(exp.seed, MOMENT_STREAM_BASE + k)
                cache[key] = moment_summary(spec, exp.mc_budget, rng)
        out.append(cache[key])
    return out


def _spec_groups(specs) -> list:
    """Positions of each distinct spec object, in order of first appearance."""
    groups: dict = {}
    for k, spec in enumerate(specs):
        groups.setdefault(id(spec), (spec, []))[1].append(k)
    return [(spec, np.asarray(pos)) for spec, pos in groups.values()]


def _run_trials(trial_fn, trials: int, d: int, workers: int):
    totals = np.empty(trials)
    entries = np.empty((trials, d, d))

    def work(ts):
        for t in ts:
            totals[t] = trial_fn(t, entries[t])

    if workers <= 1:
        work(range(trials))
    else:
        chunks = [range(i, trials, workers) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    return totals, entries


def _result(n, d, trials, totals, entries, closed, per_entry_closed) -> ExperimentResult:
    rt = math.sqrt(trials)
    if trials > 1:
        se = float(totals.std(ddof=1) / rt)
        pe_se = entries.std(axis=0, ddof=1) / rt
    else:
        se = 0.0
        pe_se = np.zeros((d, d))
    return ExperimentResult(
        n=n, d=d, trials=trials,
        empirical_mse=float(totals.mean()),
        closed_form=float(closed),
        standard_error=se,
        per_entry_empirical=entries.mean(axis=0),
        per_entry_closed_form=per_entry_closed,
        per_entry_standard_error=pe_se,
        trial_errors=totals,
    )


def run_experiment(exp: ConvergenceExperiment) -> ExperimentResult:
    """Mean over trials of ``||(1/n) F^*F - target||_F^2`` with its closed form.

    Moments that are not analytic are estimated with ``exp.mc_budget``
    samples from reserved streams, in which case the closed form is itself
    an estimate.
    """
    n, d = exp.n, exp.d
    summaries = _summaries_for(exp)
    bundle = GeneralMomentBundle.from_summaries(summaries)
    if exp.target == SCALED_IDENTITY:
        closed = closed_form_error(summaries, n, d)
        l_bar = sum(s.L for s in summaries) / n
        target = (l_bar / d) * np.eye(d)
    else:
        closed = closed_form_error_general(bundle, n)
        target = sum(bundle.S) / n
    target = np.ascontiguousarray(target)
    if all(s.fourth_mixed is not None for s in summaries):
        per_entry = (sum(s.fourth_mixed for s in summaries) / n - bundle.S_tilde) / n
    else:
        per_entry = None

    groups = _spec_groups(exp.specs)
    seed = exp.seed

    def trial(t, out):
        gen = SeededRng(seed, t).generator
        x = np.empty((n, d))
        for spec, pos in groups:
            x[pos] = spec.sample_many(len(pos), gen)
        return kernels.gram_deviation(x, target, float(n), out)

    totals, entries = _run_trials(trial, exp.trials, d, exp.workers)
    return _result(n, d, exp.trials, totals, entries, closed, per_entry)


def dft_matrix(d: int) -> np.ndarray:
    """Unitary DFT ``W[j, k] = omega^(jk) / sqrt(d)`` with ``omega = exp(-2 pi i / d)``."""
    jk = np.outer(np.arange(d), np.arange(d))
    return np.exp(-2j * np.pi * jk / d) / math.sqrt(d)


def fourier_closed_form(d: int, n: int) -> float:
    return (1.0 - 1.0 / d) / n


def fourier_row_experiment(d: int, n: int, trials: int, seed: int = 0, workers: int = 1) -> ExperimentResult:
    """i.i.d. uniformly chosen rows of the unitary DFT matrix.

    The empirical operator ``(1/n) sum z_k z_k^*`` is compared with ``I/d``
    in the complex Frobenius norm; the closed form is ``(1/n)(1 - 1/d)``.
    """
    if d < 1 or n < 1 or trials < 1:
        raise ValueError("d, n and trials must be >= 1")
    w = dft_matrix(d)
    w_re = np.ascontiguousarray(w.real)
    w_im = np.ascontiguousarray(w.imag)
    if d == 1:
        w_re[:] = 1.0
        w_im[:] = 0.0
    target = np.eye(d) / d
    per_entry = np.full((d, d), 1.0 / (n * d * d))
    np.fill_diagonal(per_entry, 0.0)

    def trial(t, out):
        gen = SeededRng(seed, t).generator
        idx = gen.integers(0, d, n)
        return kernels.hermitian_gram_deviation(w_re[idx], w_im[idx], target, float(n), out)

    totals, entries = _run_trials(trial, trials, d, workers)
    return _result(n, d, trials, totals, entries, fourier_closed_form(d, n), per_entry)


# ---------------------------------------------------------------------------
# probabilistic frame potential


def pfp_discrete(spec: DiscreteCounting) -> float:
    """Exact probabilistic frame potential of a weighted counting measure."""
    pts = spec.points
    w = spec.probabilities
    norms2 = np.sum(pts * pts, axis=1)
    if np.any((w > 0) & (norms2 == 0.0)):
        raise DegenerateMeasureError("the zero vector lies in the support")
    g = pts @ pts.T
    num = float(w @ (g * g) @ w)
    return num / float(w @ norms2) ** 2


def pair_ratio_stderr(g1: np.ndarray, pair_values: np.ndarray, m: int) -> float:
    """Standard error of a ratio of order-2 U-statistics.

    ``g1`` holds the linearised first-order projection per sample and
    ``pair_values`` the linearised kernel on disjoint sample pairs. Uses the
    exact Hoeffding variance ``(4(m-2) zeta1 + 2 zeta2) / (m(m-1))``, which
    keeps the band honest when the first-order term vanishes (tight
    measures).
    """
    zeta1 = float(np.var(g1, ddof=1))
    zeta2 = float(np.var(pair_values, ddof=1)) if pair_values.size > 1 else 0.0
    return math.sqrt(max(4.0 * (m - 2) * zeta1 + 2.0 * zeta2, 0.0) / (m * (m - 1)))


def pfp_from_samples(y: np.ndarray) -> Estimate:
    """U-statistic PFP estimate from samples (rows of ``y``)."""
    m = y.shape[0]
    if m < 2:
        raise ValueError("need at least two samples")
    norms2 = np.sum(y * y, axis=1)
    mean_norm2 = float(norms2.mean())
    if mean_norm2 == 0.0:
        raise DegenerateMeasureError("all samples are zero")
    gram = y.T @ y
    num = (float(np.sum(gram * gram)) - float(np.sum(norms2**2))) / (m * (m - 1))
    den = mean_norm2**2
    ratio = num / den
    s_hat = gram / m
    g1 = (np.einsum("mi,ij,mj->m", y, s_hat, y) - ratio * norms2 * mean_norm2) / den
    a, b = y[0 : m - 1 : 2], y[1:m:2]
    k = min(len(a), len(b))
    a, b = a[:k], b[:k]
    pair = (np.sum(a * b, axis=1) ** 2 - ratio * np.sum(a * a, axis=1) * np.sum(b * b, axis=1)) / den
    return Estimate(ratio, pair_ratio_stderr(g1, pair, m))


def empirical_pfp(spec, m: int, rng: SeededRng | np.random.Generator | None = None) -> Estimate:
    """Probabilistic frame potential of ``spec`` estimated from ``m`` draws.

    The numerator is the unbiased off-diagonal U-statistic
    ``(2/(m(m-1))) sum_{i<j} <y_i, y_j>^2``; the denominator is
    ``((1/m) sum ||y_i||^2)^2``.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    y = spec.sample_many(int(m), as_generator(rng))
    return pfp_from_samples(y)


__all__ = [
    "ConvergenceExperiment",
    "Estimate",
    "ExperimentResult",
    "GeneralMomentBundle",
    "closed_form_error",
    "closed_form_error_general",
    "empirical_pfp",
    "fourier_row_experiment",
    "per_entry_error",
    "pfp_discrete",
    "pfp_from_samples",
    "run_experiment",
]
