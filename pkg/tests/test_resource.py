import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cptkit import cpt, linalg, resource, spin
from cptkit.errors import (DegenerateDemoError, DomainError, PreconditionError, ShapeError,
                           UnsupportedOperationError, ValidationError)
from cptkit.resource import QuantumChannel

from conftest import random_unit


@pytest.fixture
def rep(cpt_half):
    return resource.z2_rep(cpt_half)


def test_maximally_mixed_is_invariant(rep):
    ok, res = resource.is_g_invariant(np.eye(8) / 8, rep)
    assert ok and res == 0


def test_eigenvector_projector_invariant(rep, cpt_half):
    v = cpt.cpt_eigensectors(cpt_half).minus_basis[2]
    assert resource.is_g_invariant(linalg.projector(v), rep)[0]


def test_standard_form_q075_is_resource(rep, cpt_half):
    psi = resource.standard_form_state(0.75, cpt_half)
    ok, res = resource.is_g_invariant(linalg.projector(psi), rep)
    assert not ok
    # psi = ((a+b) e_0 + (a-b) e_7)/sqrt 2 and CPT swaps the two coefficients,
    # so the (0, 0) entry moves by ((a+b)^2 - (a-b)^2)/2 = 2ab
    assert res == pytest.approx(2 * math.sqrt(0.75 * 0.25), abs=1e-12)


def test_invariance_shape_error(rep):
    with pytest.raises(ShapeError):
        resource.is_g_invariant(np.eye(3) / 3, rep)


def test_identity_and_twirl_channels_covariant(rep):
    assert resource.is_g_covariant(resource.identity_channel(8), rep)[0]
    assert resource.is_g_covariant(resource.twirl_channel(rep), rep)[0]


def _sector_reset_channel(cpt_op, sigma_vec):
    plus, minus = cpt.sector_projectors(cpt_op)
    minus_basis = cpt.cpt_eigensectors(cpt_op).minus_basis
    ops = [plus] + [np.outer(sigma_vec, f.conj()) for f in minus_basis]
    return QuantumChannel(ops)


def test_sector_reset_with_sector_sigma_is_covariant(rep, cpt_half):
    # sigma inside the minus sector is CPT invariant, so the map commutes with CPT
    sigma = cpt.cpt_eigensectors(cpt_half).minus_basis[0]
    assert resource.is_g_covariant(_sector_reset_channel(cpt_half, sigma), rep)[0]


def test_sector_reset_with_resource_sigma_is_not_covariant(rep, cpt_half):
    sigma = resource.standard_form_state(0.75, cpt_half)
    ok, res = resource.is_g_covariant(_sector_reset_channel(cpt_half, sigma), rep)
    assert not ok and res > 0.1


def test_channel_must_preserve_trace():
    with pytest.raises(ValidationError):
        QuantumChannel([np.eye(2) * 0.5])


def test_twirl(rep, cpt_half):
    rho = np.eye(8) / 8
    np.testing.assert_allclose(resource.twirl(rho, rep), rho)
    sec = cpt.cpt_eigensectors(cpt_half)
    p, m = sec.plus_basis[0], sec.minus_basis[0]
    psi = (p + m) / math.sqrt(2)
    expected = (linalg.projector(p) + linalg.projector(m)) / 2
    np.testing.assert_allclose(resource.twirl(linalg.projector(psi), rep), expected, atol=1e-12)


def test_twirl_rejects_antiunitary():
    with pytest.raises(UnsupportedOperationError):
        resource.twirl(np.eye(2) / 2, resource.antiunitary_z2())
    with pytest.raises(UnsupportedOperationError):
        resource.twirl_channel(resource.antiunitary_z2())


def test_klein_rep_law():
    space = spin.massive_spin_s_space(2)
    r = resource.klein_rep(cpt.build_C(space), cpt.build_PT(space), cpt.build_CPT(space))
    assert r.law_report().passed


def test_antiunitary_rep_law_and_basis():
    r = resource.antiunitary_z2()
    assert r.has_antiunitary
    assert r.law_report().passed
    assert r.notes["conjugation_basis"]["rows"] == 2


def test_consistency_identity_hamiltonian(rep, cpt_half, rng):
    rho0 = resource.random_invariant_state(cpt_half, rng)
    out = resource.unitary_consistency_check(rho0, np.eye(8), np.linspace(0, 5, 7), rep)
    assert out.passed and out.max_residual() == 0


def test_consistency_random_sector_hamiltonian(rep, cpt_half, rng):
    H = resource.random_sector_hamiltonian(cpt_half, rng)
    rho0 = resource.random_invariant_state(cpt_half, rng)
    out = resource.unitary_consistency_check(rho0, H, rng.uniform(0, 10, 20), rep)
    assert out.passed and out.max_residual() < 1e-10


def test_consistency_preconditions(rep, cpt_half, rng):
    rho0 = resource.random_invariant_state(cpt_half, rng)
    a = rng.normal(size=(8, 8))
    with pytest.raises(PreconditionError):
        resource.unitary_consistency_check(rho0, a + a.T, [1.0], rep)
    psi = resource.standard_form_state(0.75, cpt_half)
    with pytest.raises(PreconditionError):
        resource.unitary_consistency_check(linalg.projector(psi), np.eye(8), [1.0], rep)


def test_consistency_trials_report(cpt_half):
    out = resource.consistency_trials(cpt_half, trials=20, seed=1)
    assert out.passed and out.data["failures"] == 0


def test_antiunitary_demo_pure_and_mixed():
    r, H, psi0, rho0 = resource.conjugation_demo_setup()
    for state in (psi0, rho0):
        at_t = resource.antiunitary_inconsistency_demo(r, H, state, math.pi / 4)
        assert at_t.passed and at_t.data["residual"] > 0.1
        at_zero = resource.antiunitary_inconsistency_demo(r, H, state, 0.0)
        assert at_zero.data["residual"] == 0
        assert not at_zero.passed


def test_antiunitary_demo_rejects_eigenstate():
    r, H, _, _ = resource.conjugation_demo_setup()
    with pytest.raises(DegenerateDemoError):
        resource.antiunitary_inconsistency_demo(r, H, np.array([1, 0]), 1.0)


def test_antiunitary_demo_needs_antiunitary(rep):
    with pytest.raises(PreconditionError):
        resource.antiunitary_inconsistency_demo(rep, np.eye(8), np.ones(8) / math.sqrt(8), 1.0)


def test_tau_examples():
    assert resource.tau_measure(np.array([0.6, 0.8])) == pytest.approx(0, abs=1e-15)
    assert resource.tau_measure(np.array([1, 1j]) / math.sqrt(2)) == pytest.approx(1, abs=1e-15)
    psi = np.array([1, 1]) / math.sqrt(2)
    assert resource.tau_measure(psi, np.diag([1, 1j])) == pytest.approx(1, abs=1e-15)
    with pytest.raises(ValidationError):
        resource.tau_measure(psi, np.ones((2, 2)))


def test_tau_global_phase_invariant(rng):
    psi = random_unit(4, rng)
    for phi in (0.3, 1.0, math.pi / 2, 2.5):
        assert resource.tau_measure(np.exp(1j * phi) * psi) == pytest.approx(resource.tau_measure(psi), abs=1e-14)


def test_alignment_rate_values():
    assert resource.alignment_rate(1) == 0
    assert resource.alignment_rate(0.5) == math.inf
    assert resource.alignment_rate(0.75) == 2.0
    assert resource.alignment_rate(0.0) == 0
    with pytest.raises(DomainError):
        resource.alignment_rate(1.5)


def test_alignment_rate_symmetry_grid():
    for k in range(1, 100):
        q = k / 100
        assert resource.alignment_rate(q) == resource.alignment_rate(1 - q)


def test_standard_form_examples(cpt_half):
    sec = cpt.cpt_eigensectors(cpt_half)
    sf = resource.standard_form(sec.plus_basis[1], cpt_half)
    assert sf.q0 == pytest.approx(1) and not sf.minus_present
    e = np.zeros(8)
    e[[0, 7]] = 1 / math.sqrt(2)
    assert resource.standard_form(e, cpt_half).q0 == pytest.approx(1, abs=1e-15)
    psi = math.sqrt(0.75) * sec.plus_basis[0] + math.sqrt(0.25) * sec.minus_basis[0]
    sf = resource.standard_form(psi, cpt_half)
    assert sf.q0 == pytest.approx(0.75, abs=1e-15) and sf.q1 == pytest.approx(0.25, abs=1e-15)
    np.testing.assert_allclose(sf.plus_part, sec.plus_basis[0], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rate_invariant_under_cpt(seed):
    cpt_op = cpt.build_CPT(spin.massive_spin_s_space(1))
    psi = random_unit(8, np.random.default_rng(seed))
    a = resource.standard_form(psi, cpt_op)
    b = resource.standard_form(cpt_op @ psi, cpt_op)
    assert resource.alignment_rate(min(a.q0, 1.0)) == resource.alignment_rate(min(b.q0, 1.0))
    assert a.q0 + a.q1 == pytest.approx(1, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1))
def test_rate_symmetry_property(q):
    assert resource.alignment_rate(q) == resource.alignment_rate(1 - q) or abs(q - 0.5) < 1e-15
