"""Dense linear-algebra kernels checked against numpy/scipy oracles."""

import numpy as np
import numpy.linalg as npl
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from metricforge import linalg
from metricforge.errors import DefectiveMatrix, NotHermitian, SingularMatrix

RNG = np.random.default_rng(20240811)


def random_complex(n, rng=RNG, scale=1.0):
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def well_conditioned(n, rng=RNG, cond_cap=50.0):
    while True:
        m = random_complex(n, rng)
        if npl.cond(m) < cond_cap:
            return m


finite_floats = st.floats(min_value=-10.0, max_value=10.0,
                          allow_nan=False, allow_infinity=False)


@st.composite
def complex_2x2(draw):
    vals = [draw(finite_floats) for _ in range(8)]
    return np.array([[complex(vals[0], vals[1]), complex(vals[2], vals[3])],
                     [complex(vals[4], vals[5]), complex(vals[6], vals[7])]])


# ---------------------------------------------------------------------------
# solve / inverse
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 20])
def test_solve_matches_numpy(n):
    a = well_conditioned(n)
    b = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    x = linalg.solve(a, b)
    assert np.allclose(x, npl.solve(a, b), atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 4, 10])
def test_inverse_property(n):
    a = well_conditioned(n)
    assert linalg.frob(a @ linalg.inverse(a) - np.eye(n)) < 1e-10


def test_singular_matrix_raises():
    with pytest.raises(SingularMatrix):
        linalg.inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        linalg.as_matrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# eigendecomposition
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4, 6, 10, 16])
def test_eigenvalues_match_numpy(n):
    a = random_complex(n)
    pairs = linalg.eigendecompose(a)
    mine = np.array([p.value for p in pairs])
    ref = np.sort_complex(npl.eigvals(a))
    order = np.lexsort((mine.imag, mine.real))
    assert np.allclose(mine[order], np.array(sorted(ref, key=lambda z: (z.real, z.imag))),
                       atol=1e-8 * max(linalg.frob(a), 1.0))


@pytest.mark.parametrize("n", [2, 3, 5, 9])
def test_eigenvector_residuals(n):
    a = random_complex(n)
    scale = linalg.frob(a)
    for p in linalg.eigendecompose(a):
        assert npl.norm(a @ p.right - p.value * p.right) < 1e-8 * scale
        assert npl.norm(a.conj().T @ p.left - np.conj(p.value) * p.left) < 1e-8 * scale


@settings(max_examples=200, deadline=None)
@given(complex_2x2())
def test_2x2_eigenvalues_property(m):
    ref = list(npl.eigvals(m))
    pairs = linalg.eigendecompose(m, allow_defective=True)
    scale = max(linalg.frob(m), 1.0)
    # multiset comparison: sort order is unstable under ulp-level ties
    for p in pairs:
        j = min(range(len(ref)), key=lambda k: abs(ref[k] - p.value))
        assert abs(ref[j] - p.value) < 1e-7 * scale
        ref.pop(j)


def test_degenerate_spectrum():
    a = np.diag([1.0, 1.0, 2.0]).astype(complex)
    pairs = linalg.eigendecompose(a)
    vals = sorted(p.value.real for p in pairs)
    assert np.allclose(vals, [1.0, 1.0, 2.0], atol=1e-10)


def test_defective_matrix_raises():
    jordan = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(DefectiveMatrix):
        linalg.eigendecompose(jordan)
    pairs = linalg.eigendecompose(jordan, allow_defective=True)
    assert linalg.defect_indicator(pairs) < 1e-6


# ---------------------------------------------------------------------------
# Hermitian spectra
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 6, 12])
def test_hermitian_spectrum_matches_numpy(n):
    a = random_complex(n)
    h = (a + a.conj().T) / 2.0
    assert np.allclose(linalg.hermitian_spectrum(h), npl.eigvalsh(h), atol=1e-10)


def test_hermitian_spectrum_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        linalg.hermitian_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=100, deadline=None)
@given(complex_2x2())
def test_gram_matrix_psd(m):
    g = m.conj().T @ m
    eigs = linalg.hermitian_spectrum(g)
    assert eigs[0] > -1e-9 * max(linalg.frob(g), 1.0)


# ---------------------------------------------------------------------------
# matrix exponential
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_mat_exp_matches_scipy(n):
    a = random_complex(n)
    assert np.allclose(linalg.mat_exp(a), scipy.linalg.expm(a), atol=1e-10)


def test_mat_exp_nilpotent_exact():
    a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    assert np.allclose(linalg.mat_exp(a), np.eye(2) + a, atol=1e-15)


def test_mat_exp_scale_argument():
    a = random_complex(3)
    assert np.allclose(linalg.mat_exp(a, scale=-2j),
                       scipy.linalg.expm(-2j * a), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(complex_2x2(), st.floats(min_value=0.0, max_value=5.0))
def test_exp_of_hermitian_is_unitary(m, t):
    h = (m + m.conj().T) / 2.0
    u = linalg.mat_exp(h, scale=-1j * t)
    assert linalg.frob(u.conj().T @ u - np.eye(2)) < 1e-9 * max(linalg.frob(h) * t, 1.0)


def test_adjoint_involution():
    a = random_complex(4)
    assert np.array_equal(linalg.adjoint(linalg.adjoint(a)), a)
