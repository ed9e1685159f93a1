"""Backend parity: the Cython kernel and the numpy fallback must agree bitwise."""

import itertools

import numpy as np
import pytest

from srpcp import _kernels_py
from srpcp._backend import kernels


requires_cython = pytest.mark.skipif(
    kernels.BACKEND != "cython", reason="compiled kernel not available"
)


def both(b, tau):
    return kernels.canonical_solve(b, tau), _kernels_py.canonical_solve(b, tau)


@requires_cython
def test_parity_random_vectors():
    rng = np.random.default_rng(0)
    for _ in range(500):
        n = int(rng.integers(1, 40))
        b = np.sort(np.abs(rng.standard_normal(n)))[::-1].copy()
        if b[0] == 0.0:
            continue
        tau = float(rng.uniform(0.02, 2.0))
        (s1, c1, k1, t1), (s2, c2, k2, t2) = both(b, tau)
        np.testing.assert_array_equal(s1, s2)
        assert (c1, k1, t1) == (c2, k2, t2)


@requires_cython
def test_parity_grid_with_ties():
    values = [0.0, 0.5, 1.0, 2.0]
    taus = [0.2, 0.5, 1.0 / np.sqrt(2.0), 0.8, 1.2]
    for n in (1, 2, 3, 4):
        for combo in itertools.product(values, repeat=n):
            b = np.sort(np.array(combo))[::-1].copy()
            if b[0] == 0.0:
                continue
            for tau in taus:
                (s1, c1, k1, t1), (s2, c2, k2, t2) = both(b, tau)
                np.testing.assert_array_equal(s1, s2)
                assert (c1, k1, t1) == (c2, k2, t2)


@requires_cython
def test_parity_large_vector():
    rng = np.random.default_rng(1)
    b = np.sort(np.abs(rng.standard_normal(200_000)))[::-1].copy()
    for tau in (0.001, 0.01, 0.2):
        (s1, c1, k1, t1), (s2, c2, k2, t2) = both(b, tau)
        np.testing.assert_array_equal(s1, s2)
        assert (c1, k1, t1) == (c2, k2, t2)


def test_case_constants_match():
    assert kernels.CASE_ZERO == _kernels_py.CASE_ZERO
    assert kernels.CASE_IDENTITY == _kernels_py.CASE_IDENTITY
    assert kernels.CASE_SHRINK == _kernels_py.CASE_SHRINK


def test_python_kernel_shrink_tail_is_exact_zero():
    b = np.array([3.0, 2.0, 1.0, 0.5])
    s, case, k, t = _kernels_py.canonical_solve(b, 0.55)
    assert case == _kernels_py.CASE_SHRINK
    assert np.all(s[k:] == 0.0)
    assert np.all(s[:k] > 0.0)
