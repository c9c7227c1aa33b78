"""Invariance, covariance, twirling and frameness measures for Z2 / Klein reps.

Anti-unitary group elements are stored as a unitary core ``U`` plus the basis
``B`` (columns) in which complex conjugation is taken:
``T psi = U B conj(B^dagger psi)``. Internally that is ``W K`` with
``W = U B B^T`` and ``K`` entrywise conjugation in the computational basis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .cpt import cpt_eigensectors, normalized_involution, relative_phase
from .errors import (
    DegenerateDemoError,
    DomainError,
    PreconditionError,
    ShapeError,
    UnsupportedOperationError,
    ValidationError,
)
from .report import Report

INFINITE_RATE = math.inf
_ZERO_DIFF = 1e-15

KLEIN_TABLE = {
    ("1", "1"): "1", ("1", "C"): "C", ("1", "PT"): "PT", ("1", "CPT"): "CPT",
    ("C", "C"): "1", ("C", "PT"): "CPT", ("C", "CPT"): "PT",
    ("PT", "PT"): "1", ("PT", "CPT"): "C", ("CPT", "CPT"): "1",
}


def _klein_mul(a, b):
    return KLEIN_TABLE.get((a, b)) or KLEIN_TABLE[(b, a)]


@dataclass
class RepElement:
    label: str
    operator: np.ndarray
    antiunitary: bool = False
    conj_basis: np.ndarray | None = None

    def __post_init__(self):
        self.operator = linalg.as_matrix(self.operator)
        if self.conj_basis is not None:
            self.conj_basis = linalg.as_matrix(self.conj_basis)

    @property
    def effective(self):
        """W such that the element acts as W (linear) or W K (anti-linear)."""
        if not self.antiunitary or self.conj_basis is None:
            return self.operator
        b = self.conj_basis
        return self.operator @ b @ b.T

    def apply(self, psi):
        psi = np.asarray(psi, dtype=complex)
        if self.antiunitary:
            return self.effective @ psi.conj()
        return self.operator @ psi

    def conjugate(self, rho):
        """T rho T^{-1}."""
        w = self.effective
        if self.antiunitary:
            return w @ np.conj(rho) @ w.conj().T
        return w @ rho @ w.conj().T


@dataclass
class GroupRep:
    elements: list
    group: str = "Z2"
    notes: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.elements[0].operator.shape[0]

    @property
    def has_antiunitary(self):
        return any(e.antiunitary for e in self.elements)

    def element(self, label):
        for e in self.elements:
            if e.label == label:
                return e
        raise KeyError(label)

    def multiply(self, a, b):
        if self.group == "Z2":
            return a if b == "1" else (b if a == "1" else "1")
        return _klein_mul(a, b)

    def law_report(self, tol=linalg.ATOL):
        """Group law up to recorded global phases, plus unitarity of cores."""
        report = Report(f"group-law:{self.group}")
        for e in self.elements:
            res = linalg.unitarity_residual(e.effective)
            report.add(f"unitary-core:{e.label}", res <= tol, res, tol)
        for a in self.elements:
            for b in self.elements:
                target = self.element(self.multiply(a.label, b.label))
                # product of (W_a K^x)(W_b K^y): conjugate W_b when a is anti-linear
                wb = b.effective.conj() if a.antiunitary else b.effective
                prod = a.effective @ wb
                anti = a.antiunitary != b.antiunitary
                if anti != target.antiunitary:
                    report.add(f"law:{a.label}*{b.label}", False, math.inf, tol, "linearity mismatch")
                    continue
                phi, res = relative_phase(prod, target.effective)
                report.add(f"law:{a.label}*{b.label}", res <= tol, res, tol, f"global phase {phi:.15g}")
        return report


def z2_rep(cpt):
    cpt = linalg.as_matrix(cpt)
    return GroupRep([RepElement("1", np.eye(cpt.shape[0])), RepElement("CPT", cpt)], "Z2")


def klein_rep(c, pt, cpt):
    eye = np.eye(linalg.as_matrix(cpt).shape[0])
    return GroupRep(
        [RepElement("1", eye), RepElement("C", c), RepElement("PT", pt), RepElement("CPT", cpt)],
        "Klein",
    )


def antiunitary_z2(core=None, basis=None, dim=2):
    """Z2 represented by {1, U K_B}; default U = I, B = computational basis."""
    core = np.eye(dim) if core is None else linalg.as_matrix(core)
    d = core.shape[0]
    basis_used = np.eye(d) if basis is None else linalg.as_matrix(basis)
    return GroupRep(
        [RepElement("1", np.eye(d)), RepElement("T", core, antiunitary=True, conj_basis=basis_used)],
        "Z2",
        notes={"conjugation_basis": linalg.matrix_to_dict(basis_used)},
    )


def _check_dims(a, rep):
    if a.shape[0] != rep.dim:
        raise ShapeError(f"dimension {a.shape[0]} does not match representation dimension {rep.dim}")


def invariance_residual(rho, rep):
    rho = linalg.as_matrix(rho)
    _check_dims(rho, rep)
    return max(linalg.max_abs(e.conjugate(rho) - rho) for e in rep.elements)


def is_g_invariant(rho, rep, tol=linalg.ATOL):
    """(invariant?, max_g ||T(g) rho T(g)^-1 - rho||_max)."""
    res = invariance_residual(rho, rep)
    return res <= tol, res


@dataclass
class QuantumChannel:
    kraus_ops: list
    tol: float = linalg.SPECTRAL_TOL

    def __post_init__(self):
        self.kraus_ops = [linalg.as_matrix(k) for k in self.kraus_ops]
        if not self.kraus_ops:
            raise ValidationError("channel needs at least one Kraus operator")
        d = self.kraus_ops[0].shape[1]
        total = sum(k.conj().T @ k for k in self.kraus_ops)
        res = linalg.max_abs(total - np.eye(d))
        if res > self.tol:
            raise ValidationError(f"channel is not trace preserving (residual {res:.3e})")

    @property
    def dim(self):
        return self.kraus_ops[0].shape[1]

    def __call__(self, rho):
        rho = linalg.as_matrix(rho)
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)


def identity_channel(dim):
    return QuantumChannel([np.eye(dim)])


def twirl_channel(rep):
    if rep.has_antiunitary:
        raise UnsupportedOperationError("twirling over anti-unitary elements is not supported")
    w = 1 / math.sqrt(len(rep.elements))
    return QuantumChannel([w * e.operator for e in rep.elements])


def spanning_densities(dim):
    """d^2 density matrices whose complex span is all d x d matrices."""
    out = []
    eye = np.eye(dim, dtype=complex)
    for i in range(dim):
        out.append(np.outer(eye[i], eye[i]))
    for i in range(dim):
        for j in range(i + 1, dim):
            for phase in (1, 1j):
                v = (eye[i] + phase * eye[j]) / math.sqrt(2)
                out.append(np.outer(v, v.conj()))
    return out


def is_g_covariant(channel, rep, tol=linalg.ATOL):
    if not isinstance(channel, QuantumChannel):
        channel = QuantumChannel(channel)
    if channel.dim != rep.dim:
        raise ShapeError(f"channel dimension {channel.dim} vs representation {rep.dim}")
    res = 0.0
    for rho in spanning_densities(rep.dim):
        out = channel(rho)
        for e in rep.elements:
            res = max(res, linalg.max_abs(e.conjugate(out) - channel(e.conjugate(rho))))
    return res <= tol, res


def twirl(rho, rep):
    """Uniform group average (1/|G|) sum_g T(g) rho T(g)^dagger."""
    if rep.has_antiunitary:
        raise UnsupportedOperationError("twirling over anti-unitary elements is not supported")
    rho = linalg.as_matrix(rho)
    _check_dims(rho, rep)
    return sum(e.conjugate(rho) for e in rep.elements) / len(rep.elements)


def _commutator_failures(H, rep, tol):
    failures = []
    for e in rep.elements:
        res = linalg.max_abs(e.operator @ H - H @ e.operator)
        if res > tol:
            failures.append((e.label, res))
    return failures


def unitary_consistency_check(rho0, H, t_samples, rep, tol=linalg.SPECTRAL_TOL):
    """Evolve an invariant state under a symmetric Hamiltonian; it must stay invariant."""
    if rep.has_antiunitary:
        raise PreconditionError("unitary consistency requires a unitary representation")
    H = linalg.as_matrix(H)
    rho0 = linalg.as_matrix(rho0)
    _check_dims(rho0, rep)
    bad = _commutator_failures(H, rep, tol)
    if bad:
        label, res = bad[0]
        raise PreconditionError(f"[T({label}), H] != 0 (residual {res:.3e})")
    ok0, res0 = is_g_invariant(rho0, rep, tol)
    if not ok0:
        raise PreconditionError(f"initial state is not G-invariant (residual {res0:.3e})")
    report = Report("unitary-consistency")
    worst = 0.0
    for i, t in enumerate(t_samples):
        rho_t = linalg.evolve(rho0, H, t)
        res = invariance_residual(rho_t, rep)
        worst = max(worst, res)
        report.add(f"t[{i}]", res <= tol, res, tol, f"t={float(t):.15g}")
    report.data = {"max_residual": worst, "initial_residual": res0, "samples": len(t_samples)}
    return report


def antiunitary_inconsistency_demo(rep, H, state, t, threshold=0.1, tol=linalg.ATOL):
    """Exhibit a symmetric evolution that turns an invariant state into a resource.

    ``state`` is a vector (pure variant) or a density matrix (mixed variant).
    The final check passes when the invariance residual at time ``t`` exceeds
    ``threshold``.
    """
    anti = [e for e in rep.elements if e.antiunitary]
    if not anti:
        raise PreconditionError("representation has no anti-unitary element")
    H = linalg.as_matrix(H)
    state = np.asarray(state, dtype=complex)
    pure = state.ndim == 1
    if state.shape[0] != rep.dim:
        raise ShapeError(f"state dimension {state.shape[0]} vs representation {rep.dim}")
    report = Report("antiunitary-demo")
    for e in anti:
        w = e.effective
        res = linalg.max_abs(w @ H.conj() - H @ w)
        if res > tol:
            raise PreconditionError(f"T({e.label}) does not commute with H in the anti-linear sense")
        report.add(f"precondition:T({e.label})(iH)=-(iH)T({e.label})", True, res, tol)
    if pure:
        mean = np.vdot(state, H @ state)
        spread = float(np.linalg.norm(H @ state - mean * state))
        if spread <= tol:
            raise DegenerateDemoError("initial state is an eigenstate of H; no violation is possible")
        res0 = max(linalg.max_abs(e.apply(state) - state) for e in rep.elements)
        evolved = linalg.evolve_state(state, H, t)
        res_t = max(linalg.max_abs(e.apply(evolved) - evolved) for e in rep.elements)
        proj_res = invariance_residual(linalg.projector(evolved), rep)
    else:
        spread = linalg.max_abs(H @ state - state @ H)
        if spread <= tol:
            raise DegenerateDemoError("initial state commutes with H; no violation is possible")
        res0 = invariance_residual(state, rep)
        evolved = linalg.evolve(state, H, t)
        res_t = invariance_residual(evolved, rep)
        proj_res = res_t
    if res0 > tol:
        raise PreconditionError(f"initial state is not invariant (residual {res0:.3e})")
    report.add("precondition:initial_invariant", True, res0, tol)
    report.add("precondition:non_stationary", True, spread, tol)
    report.add("violation", res_t > threshold, res_t, threshold,
               "invariance residual after symmetric evolution; pass means the violation is exhibited")
    report.data = {
        "variant": "pure" if pure else "mixed",
        "t": float(t),
        "residual": res_t,
        "density_residual": proj_res,
        "conjugation_basis": rep.notes.get("conjugation_basis"),
    }
    return report


def conjugation_demo_setup(mixing=0.7):
    """The two-level demonstration: T = conjugation, H = sigma_z, psi0 = (1,1)/sqrt 2.

    Returns (rep, H, psi0, rho0) where rho0 mixes psi0 with the maximally
    mixed state using weight ``mixing``.
    """
    rep = antiunitary_z2(dim=2)
    H = np.diag([1.0, -1.0]).astype(complex)
    psi0 = np.array([1, 1], dtype=complex) / math.sqrt(2)
    rho0 = mixing * linalg.projector(psi0) + (1 - mixing) * np.eye(2) / 2
    return rep, H, psi0, rho0


def tau_measure(psi, basis_change=None):
    """1 - |sum_k psi_k^2| in the given (or computational) basis.

    ``basis_change`` holds the new basis vectors as columns; coordinates in
    that basis are ``basis_change^dagger psi``.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if basis_change is not None:
        b = linalg.as_matrix(basis_change)
        if not linalg.is_unitary(b, 1e-10):
            raise ValidationError("basis change must be unitary")
        psi = b.conj().T @ psi
    val = 1 - abs(np.sum(psi * psi))
    return float(min(max(val, 0.0), 1.0))


def alignment_rate(q0):
    """-2 log2 |q0 - q1| bits per copy; ``INFINITE_RATE`` when q0 = q1.

    The difference is evaluated as 2u - 1 with u the larger of q0 and 1 - q0,
    which is exact in floating point and makes R(q0) = R(1 - q0) hold bitwise.
    """
    q0 = float(q0)
    if not 0.0 <= q0 <= 1.0 or math.isnan(q0):
        raise DomainError(f"q0={q0} outside [0, 1]")
    upper = q0 if q0 >= 0.5 else 1.0 - q0
    diff = 2.0 * upper - 1.0
    if diff < _ZERO_DIFF:
        return INFINITE_RATE
    rate = -2.0 * math.log2(diff)
    return rate if rate > 0 else 0.0


@dataclass
class StandardFormResult:
    q0: float
    q1: float
    plus_part: np.ndarray
    minus_part: np.ndarray
    plus_present: bool = True
    minus_present: bool = True


def _sector_parts(psi, cpt):
    op, _ = normalized_involution(cpt)
    image = op @ psi
    # (psi + CPT psi)/2 and (psi - CPT psi)/2; for CPT psi the same sums occur
    # in swapped order, so the weights are bitwise symmetric
    return (psi + image) / 2, (psi - image) / 2, op


def standard_form(psi, cpt, tol=linalg.ATOL):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    plus, minus, op = _sector_parts(psi, cpt)
    q0 = float(np.vdot(plus, plus).real)
    q1 = float(np.vdot(minus, minus).real)
    sectors = cpt_eigensectors(op)
    results = []
    for part, weight, basis in ((plus, q0, sectors.plus_basis), (minus, q1, sectors.minus_basis)):
        if weight > tol**2:
            results.append((part / math.sqrt(weight), True))
        else:
            fallback = basis[0] if basis else np.zeros_like(psi)
            results.append((fallback, False))
    return StandardFormResult(q0, q1, results[0][0], results[1][0], results[0][1], results[1][1])


def standard_form_state(q0, cpt, plus=None, minus=None):
    """sqrt(q0)|+> + sqrt(1-q0)|->, defaulting to the first sector vectors."""
    if not 0.0 <= q0 <= 1.0:
        raise DomainError(f"q0={q0} outside [0, 1]")
    sectors = cpt_eigensectors(cpt)
    plus = sectors.plus_basis[0] if plus is None else plus
    minus = sectors.minus_basis[0] if minus is None else minus
    return math.sqrt(q0) * plus + math.sqrt(1 - q0) * minus


def _random_hermitian(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_sector_hamiltonian(cpt, rng):
    """H = P+ H+ P+ + P- H- P- from independent random Hermitian blocks."""
    sectors = cpt_eigensectors(cpt)
    h = 0
    for basis in (sectors.plus_basis, sectors.minus_basis):
        if basis:
            v = np.column_stack(basis)
            h = h + v @ _random_hermitian(v.shape[1], rng) @ v.conj().T
    return (h + np.conj(h).T) / 2


def random_invariant_state(cpt, rng):
    """Random density matrix block-diagonal in the CPT sectors."""
    sectors = cpt_eigensectors(cpt)
    rho = 0
    weights = rng.dirichlet([1.0, 1.0])
    for w, basis in zip(weights, (sectors.plus_basis, sectors.minus_basis)):
        if basis:
            v = np.column_stack(basis)
            k = v.shape[1]
            g = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
            block = g @ g.conj().T
            rho = rho + w * v @ (block / np.trace(block)) @ v.conj().T
    rho = (rho + np.conj(rho).T) / 2
    return rho / np.trace(rho).real


def consistency_trials(cpt, trials=200, seed=0, t_max=10.0, tol=linalg.SPECTRAL_TOL):
    """Randomized (Hamiltonian, invariant state, time) triples; all must stay invariant."""
    rng = np.random.default_rng(seed)
    rep = z2_rep(cpt)
    report = Report("unitary-consistency", seed=seed)
    worst = 0.0
    failures = 0
    for _ in range(trials):
        H = random_sector_hamiltonian(cpt, rng)
        rho0 = random_invariant_state(cpt, rng)
        t = rng.uniform(0, t_max)
        sub = unitary_consistency_check(rho0, H, [t], rep, tol)
        worst = max(worst, sub.max_residual())
        failures += not sub.passed
    report.add("invariance_preserved", failures == 0, worst, tol, f"{trials} randomized trials")
    report.data = {"trials": trials, "failures": failures, "max_residual": worst}
    return report
