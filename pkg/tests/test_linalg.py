import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from epsconvex.linalg import MAX_RANK, _rounds, check_symmetric, eigen_extremes, jacobi_eigvalsh


@pytest.mark.parametrize("n", range(2, 9))
def test_rounds_cover_every_pair_once(n):
    seen = [tuple(p) for ps, qs in _rounds(n) for p in zip(ps, qs)]
    assert sorted(seen) == [(i, j) for i in range(n) for j in range(i + 1, n)]


@pytest.mark.parametrize("n", range(1, 9))
def test_matches_lapack(rng, n):
    for _ in range(20):
        M = rng.normal(size=(n, n)) * rng.uniform(0.1, 100)
        A = M + M.T
        ref = np.linalg.eigvalsh(A)
        assert jacobi_eigvalsh(A) == pytest.approx(ref, abs=1e-12 * np.abs(ref).max())


def test_batched_stack(rng):
    M = rng.normal(size=(4, 5, 3, 3))
    A = M + np.swapaxes(M, -1, -2)
    w = jacobi_eigvalsh(A)
    assert w.shape == (4, 5, 3)
    assert w == pytest.approx(np.linalg.eigvalsh(A), abs=1e-12)
    lo, hi = eigen_extremes(A)
    assert lo.shape == (4, 5) and np.all(lo <= hi)


def test_degenerate_and_diagonal():
    assert jacobi_eigvalsh(np.diag([3.0, -1.0, 2.0])) == pytest.approx([-1, 2, 3])
    assert jacobi_eigvalsh(np.full((4, 4), 1.0)) == pytest.approx([0, 0, 0, 4], abs=1e-14)
    assert jacobi_eigvalsh(np.zeros((3, 3))) == pytest.approx([0, 0, 0])


def test_rejects_asymmetric_and_oversized():
    with pytest.raises(ValueError, match="symmetric"):
        check_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="rank"):
        jacobi_eigvalsh(np.eye(MAX_RANK + 1))
    with pytest.raises(ValueError):
        jacobi_eigvalsh(np.ones((2, 3)))


@settings(max_examples=80, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(-1e3, 1e3)))
def test_trace_and_frobenius_preserved(M):
    A = M + M.T
    w = jacobi_eigvalsh(A)
    scale = max(1.0, np.abs(A).max())
    assert w.sum() == pytest.approx(np.trace(A), abs=1e-11 * scale * 4)
    assert np.sum(w**2) == pytest.approx(np.sum(A**2), rel=1e-11, abs=1e-11 * scale**2)
    assert np.all(np.diff(w) >= 0)
