"""Acceptance suite: one test per criterion, one PASS/FAIL line per criterion.

Run on its own with ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py``.
"""

import io
import math
import sys
import time
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from cptkit import alignment, cli, cpt, dfs, linalg, momentum, resource, spin
from cptkit.cpt import PhaseConvention

# pinned tolerances
EXACT = 0.0
ATOL = 1e-12
EVOLVE_TOL = 1e-10
VIOLATION = 0.1
TAU_SHIFT = 0.1
SIGMAS = 3.0

# wall-clock limits in seconds
LIMITS = {1: 1, 2: 10, 3: 30, 4: 30, 5: 1, 6: 1, 7: 60, 8: 10, 9: 30, 10: 120}


@pytest.fixture
def verdict(capsys):
    """Collects the outcome of one criterion and prints its PASS/FAIL line."""
    state = {"ok": False, "elapsed": 0.0}
    yield state
    with capsys.disabled():
        tag = "PASS" if state["ok"] else "FAIL"
        print(f"\n[{tag}] criterion {state['n']}: {state['title']} ({state['elapsed']:.2f}s)")


def criterion(n, title):
    def wrap(fn):
        def test(verdict):
            verdict.update(n=n, title=title)
            start = time.perf_counter()
            fn()
            verdict["elapsed"] = time.perf_counter() - start
            assert verdict["elapsed"] < LIMITS[n], f"took {verdict['elapsed']:.2f}s, limit {LIMITS[n]}s"
            verdict["ok"] = True

        test.__name__ = fn.__name__
        test.__doc__ = fn.__doc__
        return test

    return wrap


@criterion(1, "dimensions and anti-diagonal form")
def test_01_dimensions():
    for spin2 in range(1, 9):
        space = spin.massive_spin_s_space(spin2)
        op = cpt.build_CPT(space)
        d = 4 * (spin2 + 1)
        assert space.dim == d and op.shape == (d, d)
        assert np.array_equal(op, np.fliplr(np.eye(d)))
    assert cpt.build_CPT(spin.massive_spin_s_space(2)).shape == (12, 12)
    for spin2 in range(1, 17):
        space = spin.massless_allowed_states(spin2)
        assert space.dim == 8
        assert np.array_equal(cpt.build_CPT(space), np.fliplr(np.eye(8)))


@criterion(2, "unitarity and Klein group law under 100 random phase conventions per space")
def test_02_klein():
    rng = np.random.default_rng(2)
    spaces = [spin.massive_spin_s_space(s2, explicit=False) for s2 in (1, 2, 3, 4)]
    spaces += [spin.massless_allowed_states(s2, explicit=False) for s2 in (1, 2, 3)]
    for space in spaces:
        for _ in range(100):
            ph = PhaseConvention.random_admissible(space, rng)
            assert linalg.unitarity_residual(cpt.build_CPT(space, ph)) <= ATOL
            rep = cpt.klein_group_report(space, ph, tol=ATOL)
            assert rep.passed, rep.failures()
            assert len(rep.data["global_phases"]) == 9


@criterion(3, "single-site reduced Dicke states and purity")
def test_03_lemma1():
    for n in range(1, 9):
        for k in range(n + 1):
            rho1 = linalg.partial_trace(linalg.projector(spin.dicke_state(n, k)), [2] * n, [0])
            expected = np.diag([(n - k) / n, k / n])
            assert linalg.max_abs(rho1 - expected) <= ATOL
            assert (abs(linalg.purity(rho1) - 1) <= ATOL) == (k in (0, n))
        assert spin.lemma1_report(n, tol=ATOL).passed


@criterion(4, "200 randomized unitary consistency trials stay invariant")
def test_04_consistency():
    space = spin.massive_spin_s_space(2)
    ph = PhaseConvention.random_admissible(space, np.random.default_rng(4))
    for op in (cpt.build_CPT(space), cpt.build_CPT(space, ph)):
        rep = resource.consistency_trials(op, trials=200, seed=4, tol=EVOLVE_TOL)
        assert rep.passed and rep.data["max_residual"] <= EVOLVE_TOL


@criterion(5, "anti-unitary symmetric evolution breaks invariance (pure and mixed)")
def test_05_antiunitary():
    rep, H, psi0, rho0 = resource.conjugation_demo_setup()
    for state in (psi0, rho0):
        late = resource.antiunitary_inconsistency_demo(rep, H, state, math.pi / 4)
        assert late.data["residual"] > VIOLATION and late.passed
        early = resource.antiunitary_inconsistency_demo(rep, H, state, 0.0)
        assert early.data["residual"] == EXACT


@criterion(6, "alignment rate and tau measure")
def test_06_measures():
    R = resource.alignment_rate
    assert R(1.0) == 0.0
    assert R(0.5) == resource.INFINITE_RATE == math.inf
    assert R(0.75) == 2.0
    for k in range(1, 100):
        assert R(k / 100) == R(1 - k / 100)
    op = alignment.default_cpt()
    rng = np.random.default_rng(6)
    for _ in range(50):
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi /= np.linalg.norm(psi)
        a = resource.standard_form(psi, op).q0
        b = resource.standard_form(op @ psi, op).q0
        assert R(min(a, 1.0)) == R(min(b, 1.0))
    psi = np.array([1, 1]) / math.sqrt(2)
    before = resource.tau_measure(psi)
    after = resource.tau_measure(psi, np.diag([1, 1j]))
    assert abs(after - before) > TAU_SHIFT


@criterion(7, "Monte-Carlo alignment error within 3 sigma of the Helstrom bound")
def test_07_alignment():
    op = alignment.default_cpt()
    rows = alignment.sweep([0.6, 0.75, 0.9], range(1, 9), trials=10_000, seed=7, cpt=op)
    bad = []
    for r in rows:
        sigma = math.sqrt(r["closed_form_error"] * (1 - r["closed_form_error"]) / 10_000)
        if abs(r["empirical_error"] - r["closed_form_error"]) > SIGMAS * sigma:
            bad.append((r["q0"], r["N"], r["empirical_error"], r["closed_form_error"]))
    assert not bad, bad
    psi = resource.standard_form_state(0.5, op)
    half = alignment.run_experiment(alignment.AlignmentExperiment(psi, 1, seed=7), op, trials=10_000)
    assert half.data["empirical_error"] == 0


@criterion(8, "grid CPT preserves norms and acts shell by shell")
def test_08_momentum():
    space = spin.massive_spin_s_space(1, explicit=False)
    grid = momentum.MomentumGrid()
    assert len(grid.points) == 32
    ph = PhaseConvention.random_admissible(space, np.random.default_rng(8))
    for phases in (None, ph):
        rep = momentum.momentum_report(space, phases, grid, n_random=100, seed=8, tol=ATOL)
        assert rep.check("norm_preserved").residual <= ATOL
        assert rep.check("offshell_blocks_zero").passed
        assert rep.check("offshell_blocks_zero").residual == EXACT
        assert rep.check("shell_blocks_match_fixed_p").passed
        assert rep.passed, rep.failures()


@criterion(9, "decoherence-free encoding round trips and capacities")
def test_09_dfs():
    rng = np.random.default_rng(9)
    cases = [(s2, True) for s2 in (1, 2, 3)] + [(s2, False) for s2 in (2, 4)]
    for spin2, massive in cases:
        space = spin.massive_spin_s_space(spin2) if massive else spin.massless_allowed_states(spin2)
        code = dfs.build_code(space)
        rep = resource.z2_rep(code.cpt)
        expected = math.log2(2 * (spin2 + 1)) if massive else 2.0
        assert code.capacity_qubits == expected
        assert dfs.capacity(spin2, massive) == expected
        for _ in range(100):
            m = dfs.random_message(code.logical_dim, rng)
            psi = dfs.encode(m, code)
            back, residual = dfs.decode(psi, code)
            assert abs(1 - abs(np.vdot(m, back)) ** 2) <= ATOL and residual <= ATOL
            ok, res = resource.is_g_invariant(linalg.projector(psi), rep, tol=ATOL)
            assert ok, res
        assert dfs.dfs_report(space, n_messages=100, seed=9, tol=ATOL).passed


def _cli_bytes(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


@criterion(10, "same seed gives byte-identical reports for every suite")
def test_10_determinism():
    runs = [
        ["verify", "klein", "--spin", "1", "--phases", "random", "--samples", "20"],
        ["verify", "lemma1", "--spin", "2"],
        ["verify", "unitary-consistency", "--spin", "1", "--trials", "50"],
        ["verify", "antiunitary-demo"],
        ["verify", "momentum", "--spin", "1/2", "--phases", "random"],
        ["verify", "dfs", "--spin", "3/2"],
        ["verify", "alignment", "--q0", "0.9", "--N", "4"],
        ["--format", "csv", "sweep", "align", "--q0-grid", "0.6,0.75,0.9", "--N-grid", "1-4", "--trials", "2000"],
        ["encode", "--spin", "1", "--noise", "depolarize(0.1)", "--trials", "200"],
    ]
    for argv in runs:
        first = _cli_bytes(["--seed", "10"] + argv)
        second = _cli_bytes(["--seed", "10"] + argv)
        assert first == second, argv
        assert first[0] == 0, (argv, first[2])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
