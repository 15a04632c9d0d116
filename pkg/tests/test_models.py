"""The three model families against closed forms and numeric oracles."""

import math

import numpy as np
import numpy.linalg as npl
import pytest
from hypothesis import given, settings, strategies as st

from metricforge import linalg, metric, models
from metricforge.errors import InvalidParams

RNG = np.random.default_rng(20240813)


def assert_instance_consistent(inst, atol=1e-9):
    """Oracle checks every unbroken instance must satisfy."""
    h = inst.hamiltonian
    scale = max(linalg.frob(h), 1.0)
    # eigenvalues against the numpy oracle
    ref = sorted(npl.eigvals(h), key=lambda z: (z.real, z.imag))
    mine = sorted(inst.analytic_eigenvalues, key=lambda z: (complex(z).real, complex(z).imag))
    assert all(abs(a - b) < atol * scale for a, b in zip(mine, ref))
    if inst.analytic_pairs is not None:
        for p in inst.analytic_pairs:
            assert npl.norm(h @ p.right - p.value * p.right) < atol * scale
            assert npl.norm(h.conj().T @ p.left - np.conj(p.value) * p.left) < atol * scale
    if inst.analytic_metric is not None:
        rep = metric.validate_metric(h, inst.analytic_metric)
        assert rep.hermitian_residual < 1e-12
        assert rep.intertwining_residual < 1e-10
        assert rep.positive
    if inst.das_data is not None:
        # the projector route yields a member of the same metric family:
        # identical up to an overall positive factor (the PT family's printed
        # pair differs by (s+t)^2/4(st - r^2 sin^2 theta))
        q = metric.das_metric(inst.das_data)
        rep = metric.validate_metric(h, q)
        assert rep.intertwining_residual < 1e-10 and rep.positive
        cmp_ = metric.compare_metrics(q, inst.analytic_metric)
        assert cmp_.verdict in ("equal", "proportional")
        if cmp_.verdict == "proportional":
            assert cmp_.factor > 0


# ---------------------------------------------------------------------------
# spin-oscillator doublet
# ---------------------------------------------------------------------------

def test_jc_reference_point():
    inst = models.jc_doublet(models.JCParams(n=0, epsilon=0.5, omega=1.0, rho=0.125))
    assert inst.phase == "unbroken"
    expected = np.array([[1.0, -0.5], [-0.5, 1.0]])
    assert linalg.frob(inst.analytic_metric.matrix - expected) < 1e-12
    root = math.sqrt(0.1875) / 2.0
    assert inst.analytic_eigenvalues == pytest.approx([0.5 - root, 0.5 + root])
    assert inst.extras["sin_theta"] == pytest.approx(0.5)
    assert_instance_consistent(inst)


def test_jc_broken_point():
    inst = models.jc_doublet(models.JCParams(rho=0.3))
    assert inst.phase == "broken"
    gamma = math.sqrt(0.11) / 2.0
    assert inst.analytic_eigenvalues[0] == pytest.approx(0.5 - 1j * gamma)
    assert inst.analytic_eigenvalues[1] == pytest.approx(0.5 + 1j * gamma)
    # oracle: numeric spectrum agrees
    ref = sorted(npl.eigvals(inst.hamiltonian), key=lambda z: z.imag)
    assert abs(ref[0] - (0.5 - 1j * gamma)) < 1e-12


def test_jc_exceptional_point():
    inst = models.jc_doublet(models.JCParams(rho=0.25))
    assert inst.phase == "exceptional"
    assert inst.analytic_metric is None


def test_jc_invalid_params():
    with pytest.raises(InvalidParams):
        models.JCParams(omega=-1.0)
    with pytest.raises(InvalidParams):
        models.JCParams(n=-1)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=6),
       st.floats(min_value=0.1, max_value=0.8),
       st.floats(min_value=1.0, max_value=2.0))
def test_jc_random_unbroken(n, eps, omega):
    # rho chosen safely inside the unbroken region (omega > eps keeps the
    # level splitting away from zero)
    rho_c = (omega - eps) / (2.0 * math.sqrt(n + 1))
    rho = 0.5 * rho_c
    inst = models.jc_doublet(models.JCParams(n=n, epsilon=eps, omega=omega, rho=rho))
    assert inst.phase == "unbroken"
    assert_instance_consistent(inst)


def test_jc_full_structure():
    inst = models.jc_full(models.JCParams(rho=0.11), levels=3)
    assert inst.hamiltonian.shape == (7, 7)
    assert inst.phase == "unbroken"
    assert_instance_consistent(inst)
    # the metric determinant factorizes over the doublet blocks
    det = npl.det(inst.analytic_metric.matrix).real
    expected = math.prod(1.0 - s ** 2 for s in inst.extras["sin_thetas"])
    assert det == pytest.approx(expected, rel=1e-10)


def test_jc_full_broken_when_any_doublet_breaks():
    # rho breaks the highest doublet first (rho_c shrinks with n)
    inst = models.jc_full(models.JCParams(rho=0.2), levels=3)
    assert inst.phase == "broken"


def test_jc_full_needs_levels():
    with pytest.raises(InvalidParams):
        models.jc_full(models.JCParams(), levels=0)


# ---------------------------------------------------------------------------
# 2x2 PT matrix
# ---------------------------------------------------------------------------

def test_pt_reference_point():
    inst = models.pt_matrix(models.PTParams(r=1.0, s=1.0, t=1.0,
                                            theta=math.pi / 6, phi=0.0))
    expected = np.array([[1.0, -0.5j], [0.5j, 1.0]])
    assert linalg.frob(inst.analytic_metric.matrix - expected) < 1e-12
    q = math.sqrt(0.75)
    assert inst.analytic_eigenvalues == pytest.approx(
        [math.cos(math.pi / 6) - q, math.cos(math.pi / 6) + q])
    assert_instance_consistent(inst)


def test_pt_das_proportional_to_spectral():
    inst = models.pt_matrix(models.PTParams(r=1.0, s=1.0, t=1.0,
                                            theta=math.pi / 6, phi=0.0))
    das = metric.das_metric(inst.das_data)
    cmp_ = metric.compare_metrics(das, inst.analytic_metric)
    assert cmp_.verdict == "proportional"
    # das/spectral ratio (s+t)^2 / (4 (st - r^2 sin^2 theta)) = 4/3 here
    assert cmp_.factor == pytest.approx(4.0 / 3.0, abs=1e-12)


def test_pt_broken_states_are_eigenvectors():
    inst = models.pt_matrix(models.PTParams(r=1.0, s=0.5, t=0.5,
                                            theta=math.pi / 2, phi=0.3))
    assert inst.phase == "broken"
    assert inst.broken_states is not None
    h = inst.hamiltonian
    for psi in inst.broken_states:
        hp = h @ psi
        lam = complex(np.vdot(psi, hp) / np.vdot(psi, psi))
        assert npl.norm(hp - lam * psi) < 1e-10
        assert min(abs(lam - v) for v in inst.analytic_eigenvalues) < 1e-10
        assert abs(npl.norm(psi) - 1.0) < 1e-10


def test_pt_exceptional():
    inst = models.pt_matrix(models.PTParams(r=1.0, s=1.0, t=1.0,
                                            theta=math.pi / 2, phi=0.0))
    assert inst.phase == "exceptional"


def test_pt_unbroken_needs_positive_st():
    with pytest.raises(InvalidParams):
        models.pt_matrix(models.PTParams(r=0.1, s=-1.0, t=-1.0, theta=0.1))


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.2, max_value=2.0),
       st.floats(min_value=0.2, max_value=2.0),
       st.floats(min_value=0.0, max_value=1.2),
       st.floats(min_value=-1.5, max_value=1.5))
def test_pt_random_unbroken(s, t, theta, phi):
    r = 0.7 * math.sqrt(s * t) / max(abs(math.sin(theta)), 1e-3)
    inst = models.pt_matrix(models.PTParams(r=r, s=s, t=t, theta=theta, phi=phi))
    assert inst.phase == "unbroken"
    assert_instance_consistent(inst)


# ---------------------------------------------------------------------------
# Dirac scalar model
# ---------------------------------------------------------------------------

def test_dirac_reference_point():
    inst = models.dirac_scalar(models.DiracParams(kx=0.0, v0=0.6))
    expected = np.array([[1.25, 0.75], [0.75, 1.25]])
    assert linalg.frob(inst.analytic_metric.matrix - expected) < 1e-12
    assert inst.analytic_eigenvalues == pytest.approx([-0.8, 0.8])
    assert_instance_consistent(inst)


def test_dirac_similarity_intertwines():
    for kx, v0 in [(0.0, 0.6), (0.8, 0.5), (1.5, 0.9), (0.3, 0.0)]:
        inst = models.dirac_scalar(models.DiracParams(kx=kx, v0=v0))
        assert metric.check_pseudo_hermitian(inst.hamiltonian, inst.similarity) < 1e-12


def test_dirac_broken_and_exceptional():
    assert models.dirac_scalar(models.DiracParams(kx=0.0, v0=2.0)).phase == "broken"
    assert models.dirac_scalar(models.DiracParams(kx=0.0, v0=1.0)).phase == "exceptional"


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=0.2, max_value=2.0))
def test_dirac_random_unbroken(kx, m0):
    mc2 = m0
    v0 = 0.6 * math.sqrt(kx ** 2 + mc2 ** 2)
    inst = models.dirac_scalar(models.DiracParams(m0=m0, kx=kx, v0=v0))
    assert inst.phase == "unbroken"
    assert_instance_consistent(inst)


# ---------------------------------------------------------------------------
# generic pipeline vs analytic metric
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("family,params,verdicts", [
    ("jc_doublet", {"n": 2, "epsilon": 0.4, "omega": 1.1, "rho": 0.06},
     ("equal", "proportional")),
    ("pt_matrix", {"r": 0.7, "s": 2.0, "t": 0.5, "theta": 0.4, "phi": 0.9},
     ("equal", "proportional")),
    # at kx != 0 the unit-normalized spectral sum weights the two levels
    # differently from the relativistically normalized closed form: a
    # different, equally valid member of the metric family
    ("dirac_scalar", {"kx": 0.8, "v0": 0.5},
     ("equal", "proportional", "distinct")),
])
def test_numeric_spectral_vs_analytic(family, params, verdicts):
    inst = models.build(family, params)
    pairs = linalg.eigendecompose(inst.hamiltonian)
    sysb = metric.biorthonormalize(pairs)
    m = metric.spectral_metric(sysb, h_scale=linalg.frob(inst.hamiltonian))
    rep = metric.validate_metric(inst.hamiltonian, m)
    assert rep.intertwining_residual < 1e-10 and rep.positive
    cmp_ = metric.compare_metrics(m, inst.analytic_metric)
    assert cmp_.verdict in verdicts


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def test_build_and_discriminant_agree():
    for family, params in [
        ("jc_doublet", {"rho": 0.1}),
        ("pt_matrix", {"r": 0.5, "s": 1.0, "t": 1.0, "theta": 0.3, "phi": 0.0}),
        ("dirac_scalar", {"kx": 0.4, "v0": 0.2}),
    ]:
        inst = models.build(family, params)
        assert models.discriminant(family, params) == pytest.approx(inst.discriminant)


def test_build_alias_and_unknown():
    inst = models.build("jc_doublet", {"eps": 0.6, "rho": 0.1})
    assert inst.params["epsilon"] == pytest.approx(0.6)
    with pytest.raises(InvalidParams):
        models.build("nope", {})
