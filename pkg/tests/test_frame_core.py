import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_orthogonal
from framelab.errors import (
    DimensionMismatchError,
    GroupClosureError,
    NotParsevalError,
    NumericalError,
    SingularFrameError,
)
from framelab.frame_core import (
    FiniteFrame,
    analysis_apply,
    canonical_dual,
    eig_sym,
    frame_bounds,
    frame_operator,
    frame_potential,
    fundamental_identity,
    group_closure,
    group_orbit_frame,
    is_tight,
    rotation2,
    synthesis_apply,
    to_parseval,
    waldron_ratio,
)

E2 = np.eye(2)
H = np.sqrt(3) / 2


def charpoly_roots(a):
    """Eigenvalues via Faddeev-LeVerrier coefficients and companion-matrix roots."""
    d = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    c = 1.0
    for k in range(1, d + 1):
        m = a @ m + c * np.eye(d)
        c = -np.trace(a @ m) / k
        coeffs.append(c)
    return np.sort(np.real(np.roots(coeffs)))[::-1]


# --- operators --------------------------------------------------------------


def test_frame_rejects_bad_input():
    with pytest.raises(DimensionMismatchError):
        FiniteFrame(np.zeros((0, 2)))
    with pytest.raises(NumericalError):
        FiniteFrame([[np.nan, 1.0]])


def test_frame_is_immutable(mb3):
    with pytest.raises(ValueError):
        mb3.vectors[0, 0] = 5.0


def test_analysis_examples(mb3):
    assert np.allclose(analysis_apply(E2, [3, 4]), [3, 4])
    assert np.allclose(analysis_apply(mb3, [1, 0]), [1, -0.5, -0.5])
    assert np.allclose(analysis_apply([[2.0, 0.0]], [0, 1]), [0])
    with pytest.raises(DimensionMismatchError):
        analysis_apply(mb3, [1, 0, 0])


def test_synthesis_examples(mb3):
    assert np.allclose(synthesis_apply(E2, [3, 4]), [3, 4])
    assert np.allclose(synthesis_apply(mb3, [1, 1, 1]), [0, 0], atol=1e-15)
    assert np.allclose(synthesis_apply([[1.0, 0.0]], [0.0]), [0, 0])
    with pytest.raises(DimensionMismatchError):
        synthesis_apply(mb3, [1, 1])


def test_frame_operator_examples(mb3):
    assert np.allclose(frame_operator(np.eye(4)), np.eye(4))
    assert np.allclose(frame_operator(mb3), 1.5 * E2)
    assert np.allclose(frame_operator([[1, 0], [1, 0], [0, 1]]), np.diag([2.0, 1.0]))
    assert np.allclose(frame_operator(mb3, normalized=True), 0.5 * E2)


def test_frame_bounds_examples(mb3):
    b = frame_bounds(mb3)
    assert b.lower == pytest.approx(1.5) and b.upper == pytest.approx(1.5)
    b = frame_bounds([[1, 0], [1, 0], [0, 1]])
    assert (b.lower, b.upper) == pytest.approx((1.0, 2.0))
    b = frame_bounds([[1.0, 0.0]])
    assert b.lower == pytest.approx(0.0, abs=1e-15) and b.upper == pytest.approx(1.0)


def test_is_tight_examples(mb3):
    assert is_tight(mb3, 1e-12) == (True, pytest.approx(1.5))
    assert is_tight([[1, 0], [1, 0], [0, 1]], 1e-12) == (False, pytest.approx(1.5))
    assert is_tight(np.eye(5), 1e-12) == (True, pytest.approx(1.0))


def test_duals(mb3):
    assert np.allclose(canonical_dual(mb3).vectors, (2 / 3) * mb3.vectors)
    assert np.allclose(canonical_dual(np.eye(3)).vectors, np.eye(3))
    with pytest.raises(SingularFrameError):
        canonical_dual([[1.0, 0.0]])
    assert np.allclose(to_parseval(mb3).vectors, np.sqrt(2 / 3) * mb3.vectors)
    assert np.allclose(to_parseval(np.eye(3)).vectors, np.eye(3))
    assert np.allclose(to_parseval([[2, 0], [0, 2]]).vectors, E2)


def test_potentials(mb3):
    assert frame_potential(mb3) == pytest.approx(4.5)
    assert frame_potential([[1, 0, 0], [0, 1, 0]]) == pytest.approx(2.0)
    assert frame_potential([[1, 0], [1, 0]]) == pytest.approx(4.0)
    assert waldron_ratio(mb3) == pytest.approx(0.5)
    assert waldron_ratio([[1, 0], [1, 0], [0, 1]]) == pytest.approx(5 / 9)
    assert waldron_ratio([[2, 0], [0, 2]]) == pytest.approx(0.5)


# --- eigensolver ------------------------------------------------------------


def test_eig_trivial():
    assert np.allclose(eig_sym(np.eye(4)).eigenvalues, 1.0)
    assert np.allclose(eig_sym(np.diag([1.0, 2.0])).eigenvalues, [2.0, 1.0])


@pytest.mark.parametrize("seed", range(10))
def test_eig_matches_charpoly_oracle(seed):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((4, 4))
    a = b + b.T
    eig = eig_sym(a)
    assert np.allclose(eig.eigenvalues, charpoly_roots(a), atol=1e-8)
    assert np.allclose(eig.reconstruct(), a, atol=1e-12)
    assert np.allclose(eig.eigenvectors.T @ eig.eigenvectors, np.eye(4), atol=1e-12)
    assert np.all(np.diff(eig.eigenvalues) <= 0)


def test_eig_rejects():
    with pytest.raises(DimensionMismatchError):
        eig_sym(np.zeros((2, 3)))
    with pytest.raises(NumericalError):
        eig_sym([[1.0, 2.0], [0.0, 1.0]])


# --- fundamental identity --------------------------------------------------


def test_fundamental_identity_examples(mb3):
    p = to_parseval(mb3)
    x = np.array([0.3, -1.2])
    lhs, rhs, ineq = fundamental_identity(p, [], x)
    assert lhs == pytest.approx(0, abs=1e-14) and rhs == pytest.approx(0, abs=1e-14)
    assert ineq == pytest.approx(x @ x)
    assert fundamental_identity(E2, [0], [1, 0]) == pytest.approx((0, 0, 1))
    # brute-force evaluation with explicit loops
    v = p.vectors
    e1 = np.array([1.0, 0.0])
    c = [float(np.dot(e1, v[i])) for i in range(3)]
    s_j = c[0] * v[0]
    s_c = c[1] * v[1] + c[2] * v[2]
    expect = (c[0] ** 2 - s_j @ s_j, c[1] ** 2 + c[2] ** 2 - s_c @ s_c, c[0] ** 2 + s_c @ s_c)
    assert fundamental_identity(p, [0], e1) == pytest.approx(expect, abs=1e-14)


def test_fundamental_identity_requires_parseval(mb3):
    with pytest.raises(NotParsevalError):
        fundamental_identity(mb3, [0], [1, 0])


# --- groups -----------------------------------------------------------------


def test_orbit_examples(mb3):
    sq = group_orbit_frame([rotation2(np.pi / 2)], [1, 0])
    assert np.allclose(sq.vectors, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    assert is_tight(sq, 1e-12) == (True, pytest.approx(2.0))
    one = group_orbit_frame([np.eye(2)], [1, 0])
    assert one.n == 1 and not is_tight(one, 1e-12)[0]
    tri = group_orbit_frame([rotation2(2 * np.pi / 3)], [1, 0])
    assert np.allclose(tri.vectors, mb3.vectors, atol=1e-15)


def test_group_closure_checks():
    assert group_closure([rotation2(np.pi / 3)], 2).shape == (6, 2, 2)
    with pytest.raises(GroupClosureError):
        group_closure([[[2.0, 0.0], [0.0, 1.0]]], 2)
    with pytest.raises(GroupClosureError):
        group_closure([rotation2(1.0)], 2, cap=50)  # irrational angle: infinite group


# --- properties ------------------------------------------------------------

frames = st.integers(1, 5).flatmap(
    lambda d: st.integers(1, 9).flatmap(
        lambda n: arrays(np.float64, (n, d), elements=st.floats(-3, 3, allow_nan=False, width=64))
    )
)


@settings(max_examples=200, deadline=None)
@given(frames)
def test_spanning_iff_positive_lower_bound(v):
    rank = np.linalg.matrix_rank(v, tol=1e-6 * max(1.0, np.abs(v).max()))
    b = frame_bounds(v)
    if rank == v.shape[1]:
        assert b.lower > 0
    if b.lower > 1e-6 * max(b.upper, 1.0):
        assert rank == v.shape[1]


@settings(max_examples=200, deadline=None)
@given(frames)
def test_fp_is_squared_operator_norm(v):
    s = frame_operator(v)
    ref = float(np.sum(s * s))
    assert frame_potential(v) == pytest.approx(ref, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_reconstruction_and_parseval(seed):
    rng = np.random.default_rng(seed)
    d = rng.integers(1, 6)
    n = d + rng.integers(0, 6)
    v = rng.standard_normal((n, d))
    dual = canonical_dual(v).vectors
    for _ in range(5):
        x = rng.standard_normal(d)
        rec = (dual @ x) @ v
        assert np.linalg.norm(rec - x) <= 1e-9 * np.linalg.norm(x)
    flag, a = is_tight(to_parseval(v), 1e-8)
    assert flag and a == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(20))
def test_waldron_bound_and_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 6))
    n = d + int(rng.integers(0, 6))
    v = rng.standard_normal((n, d))
    r = waldron_ratio(v)
    assert r >= 1 / d - 1e-12
    assert (abs(r - 1 / d) <= 1e-10) == is_tight(v, 1e-10 * np.sum(v * v))[0] or d == 1
    u = random_orthogonal(rng, d)
    assert frame_potential(v @ u.T) == pytest.approx(frame_potential(v), rel=1e-10)


def random_parseval(rng):
    d = int(rng.integers(1, 6))
    n = d + int(rng.integers(0, 6))
    return to_parseval(rng.standard_normal((n, d)))


def test_fundamental_identity_random():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        p = random_parseval(rng)
        subset = [i for i in range(p.n) if rng.random() < 0.5]
        x = rng.standard_normal(p.d)
        lhs, rhs, ineq = fundamental_identity(p, subset, x)
        assert abs(lhs - rhs) <= 1e-10
        assert ineq >= 0.75 * (x @ x) - 1e-10


def test_fundamental_identity_exhaustive_subsets(mb3):
    p = to_parseval(mb3)
    x = np.array([0.7, 0.2])
    for k in range(4):
        for subset in itertools.combinations(range(3), k):
            lhs, rhs, _ = fundamental_identity(p, subset, x)
            assert lhs == pytest.approx(rhs, abs=1e-12)
