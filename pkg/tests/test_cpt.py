import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cptkit import cpt, linalg, spin
from cptkit.cpt import PhaseConvention
from cptkit.errors import ClosureError, ValidationError
from cptkit.spin import BasisLabel, SpinSpace


def anti_identity(d):
    return np.fliplr(np.eye(d))


@pytest.mark.parametrize("spin2", range(1, 9))
def test_massive_zero_phase_cpt_is_anti_diagonal(spin2):
    space = spin.massive_spin_s_space(spin2, explicit=False)
    op = cpt.build_CPT(space)
    assert op.shape == (4 * (spin2 + 1),) * 2
    np.testing.assert_array_equal(op, anti_identity(space.dim))


def test_s1_is_twelve_by_twelve():
    assert cpt.build_CPT(spin.massive_spin_s_space(2)).shape == (12, 12)


@pytest.mark.parametrize("spin2", [1, 2, 5, 16])
def test_massless_zero_phase_cpt(spin2):
    op = cpt.build_CPT(spin.massless_allowed_states(spin2))
    np.testing.assert_array_equal(op, anti_identity(8))
    np.testing.assert_array_equal(op @ op, np.eye(8))


def test_c_and_pt_zero_phase_are_permutations():
    space = spin.massive_spin_s_space(1)
    c, pt = cpt.build_C(space), cpt.build_PT(space)
    for lab in space.labels:
        i = space.index(lab)
        assert c[space.index(lab.c_image()), i] == 1
        assert pt[space.index(lab.pt_image()), i] == 1
    np.testing.assert_array_equal(c @ pt, cpt.build_CPT(space))
    np.testing.assert_array_equal(c @ pt, pt @ c)


def test_closure_error_names_label():
    lab = BasisLabel(Fraction(1), 1, 1)
    space = SpinSpace(1, True, (lab,))
    with pytest.raises(ClosureError) as info:
        cpt.build_CPT(space)
    assert info.value.label == lab


def test_zero_phase_klein_exact():
    rep = cpt.klein_group_report(spin.massive_spin_s_space(1))
    assert rep.passed
    assert all(c.residual == 0 for c in rep.checks)
    assert all(v == 0 for v in rep.data["global_phases"].values())


def test_random_phase_klein(rng):
    space = spin.massive_spin_s_space(2)
    for _ in range(20):
        rep = cpt.klein_group_report(space, PhaseConvention.random_admissible(space, rng))
        assert rep.passed, rep.failures()


def test_inadmissible_phases_rejected():
    with pytest.raises(ValidationError):
        PhaseConvention({(1, 1, 1): 0.3}, {})


def test_non_klein_phases_detected():
    # admissible CPT symmetry but C squares to a label-dependent phase
    space = spin.massive_spin_s_space(1)
    phases = PhaseConvention({(1, 1, 1): 0.5, (-1, -1, -1): 0.5}, {(1, 1, 1): -0.5, (-1, -1, -1): -0.5})
    rep = cpt.klein_group_report(space, phases)
    assert not rep.passed
    assert "law:C*C=1" in rep.failures()


def test_phase_roundtrip(rng):
    space = spin.massless_allowed_states(3)
    ph = PhaseConvention.random_admissible(space, rng)
    back = PhaseConvention.from_dict(json.loads(json.dumps(ph.to_dict())))
    np.testing.assert_array_equal(cpt.build_CPT(space, back), cpt.build_CPT(space, ph))


def test_sector_dimensions():
    s1 = cpt.cpt_eigensectors(cpt.build_CPT(spin.massive_spin_s_space(2)))
    assert (len(s1.plus_basis), len(s1.minus_basis)) == (6, 6)
    ml = cpt.cpt_eigensectors(cpt.build_CPT(spin.massless_allowed_states(4)))
    assert (len(ml.plus_basis), len(ml.minus_basis)) == (4, 4)


def test_two_dim_sectors():
    sec = cpt.cpt_eigensectors(anti_identity(2))
    np.testing.assert_allclose(sec.plus_basis[0], np.array([1, 1]) / np.sqrt(2))
    np.testing.assert_allclose(sec.minus_basis[0], np.array([1, -1]) / np.sqrt(2))


def test_sectors_under_random_phases(rng):
    space = spin.massive_spin_s_space(3)
    op = cpt.build_CPT(space, PhaseConvention.random_admissible(space, rng))
    sec = cpt.cpt_eigensectors(op)
    norm_op, _ = cpt.normalized_involution(op)
    for sign, basis in ((1, sec.plus_basis), (-1, sec.minus_basis)):
        for v in basis:
            np.testing.assert_allclose(norm_op @ v, sign * v, atol=1e-12)
    full = np.column_stack(sec.plus_basis + sec.minus_basis)
    assert linalg.unitarity_residual(full) < 1e-12
    np.testing.assert_allclose(sec.projector(1) + sec.projector(-1), np.eye(space.dim), atol=1e-12)


def test_relative_phase():
    a = np.exp(0.7j) * np.eye(3)
    phi, res = cpt.relative_phase(a, np.eye(3))
    assert phi == pytest.approx(0.7) and res < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.booleans(), st.integers(0, 2**32 - 1))
def test_random_admissible_phases_always_satisfy_klein_law(spin2, massive, seed):
    space = spin.massive_spin_s_space(spin2, explicit=False) if massive else spin.massless_allowed_states(spin2, explicit=False)
    ph = PhaseConvention.random_admissible(space, np.random.default_rng(seed))
    rep = cpt.klein_group_report(space, ph)
    assert rep.passed, rep.failures()
    op = cpt.build_CPT(space, ph)
    assert linalg.unitarity_residual(op) < 1e-12
