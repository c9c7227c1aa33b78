"""Basis labels, Dirac structures and Bargmann-Wigner state spaces.

A spin-s system is assembled from ``n = 2s`` spin-1/2 primitives. All spin
values are carried as the integer ``spin2 = 2s`` (and ``spin_z2 = 2*m``) so
no floating point spin ever appears.

Canonical basis order of a :class:`SpinSpace` (fixed for the whole package):
particle sector (u > 0) before antiparticle sector, within a sector +p before
-p, within that spin_z descending. Under this order the zero-phase CPT map
``(u, m, p) -> (-u, -m, -p)`` sends index ``i`` to ``d - 1 - i``.

Primitive two-level factor: index 0 is spin up (m = +1/2), index 1 is spin
down; multi-primitive vectors use the left-slowest Kronecker convention of
:mod:`cptkit.linalg`.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import linalg
from .errors import CapacityError, DomainError, ShapeError
from .report import Report

EXPLICIT_SPIN2_CAP = 8
COMBINATORIAL_SPIN2_CAP = 16

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])


def parse_spin(token):
    """Parse "1/2", "1", "3/2"... into the integer 2s.

    Raises DomainError for anything that is not a positive half-integer.
    """
    try:
        value = Fraction(str(token).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse spin {token!r}") from exc
    twice = value * 2
    if twice.denominator != 1:
        raise DomainError(f"spin {token!r} is not a half-integer")
    if twice < 1:
        raise DomainError(f"spin {token!r}: need 2s >= 1 for at least one primitive")
    return int(twice)


def format_spin(spin2):
    return str(spin2 // 2) if spin2 % 2 == 0 else f"{spin2}/2"


@dataclass(frozen=True, order=True)
class BasisLabel:
    """Generalized basis ket |u, s_z, p> at fixed |p|.

    ``u`` is the signed internal quantum number (only its sign enters the CPT
    action), ``spin_z2`` is twice the spin projection and ``p_sign`` is +1 or
    -1 for momentum along +z or -z.
    """

    u: Fraction
    spin_z2: int
    p_sign: int
    massive: bool = True

    def __post_init__(self):
        if self.u == 0:
            raise DomainError("u must be nonzero")
        if self.p_sign not in (1, -1):
            raise DomainError(f"p_sign must be +1 or -1, got {self.p_sign}")

    @property
    def u_sign(self):
        return 1 if self.u > 0 else -1

    @property
    def spin_z(self):
        return Fraction(self.spin_z2, 2)

    @property
    def helicity_sign(self):
        return (1 if self.spin_z2 > 0 else -1) * self.p_sign if self.spin_z2 else 0

    @property
    def key(self):
        """Hashable sign key (u_sign, spin_z2, p_sign) used for phase tables."""
        return (self.u_sign, self.spin_z2, self.p_sign)

    def c_image(self):
        return BasisLabel(-self.u, self.spin_z2, self.p_sign, self.massive)

    def pt_image(self):
        return BasisLabel(self.u, -self.spin_z2, -self.p_sign, self.massive)

    def cpt_image(self):
        return BasisLabel(-self.u, -self.spin_z2, -self.p_sign, self.massive)

    def __str__(self):
        u = "+u" if self.u > 0 else "-u"
        p = "+p" if self.p_sign > 0 else "-p"
        return f"|{u},{self.spin_z},{p}>"

    def to_dict(self):
        return {
            "u": str(self.u),
            "spin_z2": self.spin_z2,
            "p_sign": self.p_sign,
            "massive": self.massive,
        }


@dataclass(frozen=True)
class EmbeddedState:
    """A label's realization on ``2s`` primitives sharing (u sign, p sign).

    Only the spin factor is materialized; states with different tags are
    orthogonal by construction.
    """

    u_sign: int
    p_sign: int
    amplitudes: np.ndarray

    def inner(self, other):
        if (self.u_sign, self.p_sign) != (other.u_sign, other.p_sign):
            return 0j
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class SpinSpace:
    spin2: int
    massive: bool
    labels: tuple
    embedded: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        for lab in self.labels:
            if abs(lab.spin_z2) > self.spin2:
                raise DomainError(f"{lab} has |spin_z| above s")

    @property
    def dim(self):
        return len(self.labels)

    @property
    def spin(self):
        return Fraction(self.spin2, 2)

    def index(self, label):
        return self._index[label]

    def __contains__(self, label):
        return label in self._index

    @property
    def explicit(self):
        return bool(self.embedded)

    def gram_matrix(self):
        states = [self.embedded[lab] for lab in self.labels]
        return np.array([[a.inner(b) for b in states] for a in states])

    def to_dict(self, with_amplitudes=False):
        doc = {
            "spin": format_spin(self.spin2),
            "spin2": self.spin2,
            "massive": self.massive,
            "dim": self.dim,
            "labels": [lab.to_dict() for lab in self.labels],
        }
        if with_amplitudes and self.embedded:
            doc["embedded"] = [
                {
                    "label": lab.to_dict(),
                    "u_sign": self.embedded[lab].u_sign,
                    "p_sign": self.embedded[lab].p_sign,
                    "amplitudes": linalg.matrix_to_dict(self.embedded[lab].amplitudes),
                }
                for lab in self.labels
            ]
        return doc


# -- Dirac structures -------------------------------------------------------

def gamma_matrices():
    """(g0, g1, g2, g3, g5) in the Dirac representation, g5 = i g0 g1 g2 g3."""
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    g0 = np.block([[eye, zero], [zero, -eye]])
    gs = [np.block([[zero, s], [-s, zero]]) for s in PAULI]
    g5 = 1j * g0 @ gs[0] @ gs[1] @ gs[2]
    return (g0, *gs, g5)


def sigma_munu(mu, nu):
    g = gamma_matrices()
    return 0.5j * (g[mu] @ g[nu] - g[nu] @ g[mu])


def spin_matrices():
    """Sigma^i = diag(sigma^i, sigma^i).

    Normalized so that g0 g^i = g5 Sigma^i holds; eigenvalues are +-1.
    """
    zero = np.zeros((2, 2), dtype=complex)
    return tuple(np.block([[s, zero], [zero, s]]) for s in PAULI)


def massless_bispinor(spin_z2, p_sign):
    """Weyl bispinor of one massless primitive with helicity = chirality.

    Chirality equals sign(spin_z) * sign(p); the spinor is
    (chi, c*chi)/sqrt(2) with chi the spin-z eigenvector.
    """
    chi = np.array([1, 0], dtype=complex) if spin_z2 > 0 else np.array([0, 1], dtype=complex)
    c = (1 if spin_z2 > 0 else -1) * p_sign
    return np.concatenate([chi, c * chi]) / math.sqrt(2)


def helicity_residual(state, p_sign):
    """|| (g5 - Sigma.p/|p|) psi || for a 4-component bispinor, p along z."""
    psi = np.asarray(state, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise ShapeError(f"bispinor must have 4 components, got {psi.shape}")
    if p_sign not in (1, -1):
        raise DomainError("p_sign must be +1 or -1")
    g5 = gamma_matrices()[4]
    sz = spin_matrices()[2]
    return float(np.linalg.norm((g5 - p_sign * sz) @ psi))


def energy(m, p):
    """Relativistic energy sqrt(p^2 + m^2) in natural units."""
    if m < 0 or p < 0:
        raise DomainError("mass and momentum magnitude must be non-negative")
    return math.hypot(p, m)


# -- symmetric subspace -----------------------------------------------------

def dicke_state(n, k):
    """Normalized symmetric state of n primitives with k spins lowered."""
    if n < 1:
        raise DomainError("need at least one primitive")
    if not 0 <= k <= n:
        raise DomainError(f"k={k} outside 0..{n}")
    if 2**n > linalg.dimension_cap():
        raise CapacityError(f"2^{n} exceeds the dimension cap")
    psi = np.zeros(2**n, dtype=complex)
    amp = 1 / math.sqrt(math.comb(n, k))
    for down in combinations(range(n), k):
        idx = sum(1 << (n - 1 - site) for site in down)
        psi[idx] = amp
    return psi


def site_transposition(n, i, j):
    """Permutation matrix swapping primitives i and j on (C^2)^n."""
    dim = 2**n
    perm = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> (n - 1 - s)) & 1 for s in range(n)]
        bits[i], bits[j] = bits[j], bits[i]
        out = sum(b << (n - 1 - s) for s, b in enumerate(bits))
        perm[out, idx] = 1
    return perm


def chirality_operators(n, p_sign=1):
    """Local chirality operators on (C^2)^n and their sum Gamma5.

    On one primitive at fixed momentum the chirality equals the helicity, so
    the local operator is ``p_sign * sigma_z / 2`` (eigenvalues +-1/2).
    """
    if n < 1:
        raise DomainError("need at least one primitive")
    if 2**n > linalg.dimension_cap():
        raise CapacityError(f"2^{n} exceeds the dimension cap")
    g5 = p_sign * SIGMA_Z / 2
    eye = np.eye(2, dtype=complex)
    local = []
    for i in range(n):
        factors = [g5 if s == i else eye for s in range(n)]
        local.append(linalg.tensor_all(factors) if n > 1 else g5.copy())
    return local, sum(local)


def _spin_values(spin2):
    return range(spin2, -spin2 - 1, -2)


def _check_spin2(spin2, limit):
    if spin2 < 1:
        raise DomainError("2s must be a positive integer")
    if spin2 > limit:
        raise CapacityError(f"2s={spin2} exceeds the explicit cap {limit}")


def _make_space(spin2, massive, spin_values, explicit, explicit_cap):
    labels = []
    for u_sign in (1, -1):
        for p_sign in (1, -1):
            for m2 in spin_values:
                labels.append(BasisLabel(Fraction(u_sign), m2, p_sign, massive))
    embedded = {}
    if explicit:
        _check_spin2(spin2, explicit_cap)
        for lab in labels:
            k = (spin2 - lab.spin_z2) // 2
            embedded[lab] = EmbeddedState(lab.u_sign, lab.p_sign, dicke_state(spin2, k))
    return SpinSpace(spin2, massive, tuple(labels), embedded)


def massive_primitive_basis():
    """The eight spin-1/2 labels |+-u, +-1/2, +-p> in canonical order."""
    return massive_spin_s_space(1)


def massive_spin_s_space(spin2, explicit=True, explicit_cap=EXPLICIT_SPIN2_CAP):
    """4(2s+1)-dimensional massive space at fixed |p|.

    With ``explicit=True`` every label carries its Dicke realization; this is
    limited to ``2s <= explicit_cap``. The combinatorial (label-only) mode
    has no such limit.
    """
    if spin2 < 1:
        raise DomainError("2s must be a positive integer")
    return _make_space(spin2, True, _spin_values(spin2), explicit, explicit_cap)


def massless_allowed_states(spin2, explicit=None, explicit_cap=EXPLICIT_SPIN2_CAP):
    """Eight-dimensional massless space: spin_z = +-s only.

    Intermediate projections are excluded because their single-primitive
    reduced states are mixed (see :func:`lemma1_report`). ``explicit`` defaults
    to True when ``2s`` is within the cap.
    """
    if spin2 < 1:
        raise DomainError("2s must be a positive integer")
    if explicit is None:
        explicit = spin2 <= explicit_cap
    return _make_space(spin2, False, (spin2, -spin2), explicit, explicit_cap)


def single_site_weights(n, k):
    """Closed-form diagonal of the one-primitive reduced Dicke state."""
    return Fraction(n - k, n), Fraction(k, n)


def _weights_in_s(spin2, k):
    # Binomial coefficients written in s rather than n = 2s; only defined for
    # integer s and 0 <= k <= s.
    if spin2 % 2 or k > spin2 // 2:
        return None
    s = spin2 // 2

    def binom(a, b):
        return math.comb(a, b) if 0 <= b <= a else 0

    norm = math.comb(s, k)
    return Fraction(binom(s - 1, s - k - 1), norm), Fraction(binom(s - 1, k - 1), norm)


def lemma1_report(spin2, tol=linalg.ATOL, explicit_cap=EXPLICIT_SPIN2_CAP):
    """Single-primitive reduced states of every symmetric state of 2s primitives.

    For k = 0..2s (M = s - k) this computes the reduced state by partial
    trace, its purity and entropy, and whether it is an eigenstate of the
    local chirality operator. The expected outcome is: pure and a chirality
    eigenstate exactly when k is 0 or 2s.
    """
    _check_spin2(spin2, explicit_cap)
    n = spin2
    report = Report("lemma1")
    _, total = chirality_operators(n)
    g5_site = SIGMA_Z / 2
    rows = []
    for k in range(n + 1):
        psi = dicke_state(n, k)
        rho1 = linalg.partial_trace(linalg.projector(psi), [2] * n, [0])
        w_up, w_down = single_site_weights(n, k)
        expected = np.diag([float(w_up), float(w_down)]).astype(complex)
        res_closed = linalg.max_abs(rho1 - expected)
        pur = linalg.purity(rho1)
        extremal = k in (0, n)
        is_pure = abs(pur - 1) <= tol
        lam = np.trace(g5_site @ rho1).real
        eig_res = linalg.max_abs(g5_site @ rho1 - lam * rho1)
        is_eig = eig_res <= tol
        M2 = n - 2 * k
        gamma_res = float(np.linalg.norm(total @ psi - (M2 / 2) * psi))
        in_s = _weights_in_s(spin2, k)
        tag = f"k={k}"
        report.add(f"{tag}:reduced_state_closed_form", res_closed <= tol, res_closed, tol)
        report.add(f"{tag}:total_chirality_eigenvalue", gamma_res <= tol, gamma_res, tol,
                   f"Gamma5 eigenvalue M = s - k = {Fraction(M2, 2)}")
        report.add(f"{tag}:pure_iff_extremal", is_pure == extremal, abs(pur - 1), tol,
                   f"purity {pur:.12g}")
        report.add(f"{tag}:chirality_eigenstate_iff_extremal", is_eig == extremal, eig_res, tol)
        rows.append({
            "k": k,
            "M2": M2,
            "M2_alt_s_minus_2k": spin2 - 4 * k,
            "purity": pur,
            "entropy_bits": linalg.von_neumann_entropy(rho1),
            "weights": [str(w_up), str(w_down)],
            "chirality_eigenstate": is_eig,
            "coefficient_formula_in_s": None if in_s is None else [str(x) for x in in_s],
            "coefficient_formula_agrees": None if in_s is None else in_s == (w_up, w_down),
        })
    report.data = {
        "spin2": spin2,
        "n_primitives": n,
        "M_convention": "M = s - k, k = number of lowered primitives (Gamma5 counting); "
                        "M2_alt_s_minus_2k records the alternative s - 2k labelling",
        "rows": rows,
    }
    return report
