"""C, PT and CPT as phase-decorated permutation matrices over a SpinSpace.

Matrix convention: ``op[index(image(x)), index(x)] = exp(i*theta(x))``, i.e.
``op @ e_x = exp(i*theta(x)) e_image(x)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ClosureError, ValidationError
from .report import Report

TWO_PI = 2 * math.pi


def _wrap(angle):
    a = math.fmod(angle, TWO_PI)
    if a < 0:
        a += TWO_PI
    # fmod can return exactly 2*pi after the shift for tiny negative inputs
    return 0.0 if a >= TWO_PI else a


def _angle_distance(a, b):
    d = abs(_wrap(a) - _wrap(b))
    return min(d, TWO_PI - d)


def _neg_key(key):
    u, m2, p = key
    return (-u, -m2, -p)


@dataclass
class PhaseConvention:
    """Per-label phase angles for C and PT, keyed by (u_sign, spin_z2, p_sign).

    Missing keys mean phase 0. The CPT phase is the sum of the two and must
    agree between a label and its full sign flip.
    """

    theta_C: dict = field(default_factory=dict)
    theta_PT: dict = field(default_factory=dict)
    tol: float = linalg.ATOL

    def __post_init__(self):
        self.theta_C = {tuple(k): _wrap(float(v)) for k, v in self.theta_C.items()}
        self.theta_PT = {tuple(k): _wrap(float(v)) for k, v in self.theta_PT.items()}
        keys = set(self.theta_C) | set(self.theta_PT)
        for key in keys:
            d = _angle_distance(self.cpt(key), self.cpt(_neg_key(key)))
            if d > self.tol:
                raise ValidationError(
                    f"CPT phase at {key} differs from its sign-flipped partner by {d:.3e}")

    def c(self, key):
        return self.theta_C.get(key, 0.0)

    def pt(self, key):
        return self.theta_PT.get(key, 0.0)

    def cpt(self, key):
        return _wrap(self.c(key) + self.pt(key))

    @property
    def is_zero(self):
        return not any(self.theta_C.values()) and not any(self.theta_PT.values())

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def random_admissible(cls, space, rng):
        """Draw a convention for which {1, C, PT, CPT} is a projective Klein
        four-group representation with CPT = C PT up to a global phase.

        Solving those constraints together with the CPT phase symmetry on each
        orbit {x, Cx, PTx, CPTx} leaves two free global angles (A, B), two
        global signs (kappa, lam) and discrete per-orbit choices (j, m).
        """
        A, B = rng.uniform(0, TWO_PI, size=2)
        kappa, lam = math.pi * rng.integers(0, 2, size=2)
        theta_c, theta_pt = {}, {}
        seen = set()
        for lab in space.labels:
            x = lab.key
            if x in seen:
                continue
            c, q, r = lab.c_image().key, lab.pt_image().key, lab.cpt_image().key
            seen.update((x, c, q, r))
            j = int(rng.integers(0, 4))
            m = int(rng.integers(0, 2))
            a_x = A / 2 + j * math.pi / 2
            theta_c[x] = a_x
            theta_c[c] = A - a_x
            theta_c[q] = a_x + kappa
            theta_c[r] = A - a_x + kappa
            b_x = (A + B + kappa + lam) / 2 - a_x + m * math.pi
            theta_pt[x] = b_x
            theta_pt[q] = B - b_x
            theta_pt[c] = b_x - lam
            theta_pt[r] = B - b_x + lam
        return cls(theta_c, theta_pt)

    def to_dict(self):
        def rows(table):
            return [[k[0], k[1], k[2], v] for k, v in sorted(table.items())]

        return {"theta_C": rows(self.theta_C), "theta_PT": rows(self.theta_PT)}

    @classmethod
    def from_dict(cls, doc):
        try:
            tc = {(int(a), int(b), int(c)): float(t) for a, b, c, t in doc.get("theta_C", [])}
            tp = {(int(a), int(b), int(c)): float(t) for a, b, c, t in doc.get("theta_PT", [])}
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed phase document: {exc}") from exc
        return cls(tc, tp)


def _build(space, image, phase):
    d = space.dim
    op = np.zeros((d, d), dtype=complex)
    for j, lab in enumerate(space.labels):
        target = image(lab)
        if target not in space:
            raise ClosureError(lab, f"{lab} maps to {target}, which is not in the space")
        theta = phase(lab.key)
        op[space.index(target), j] = 1.0 if theta == 0.0 else np.exp(1j * theta)
    return op


def build_C(space, phases=None):
    phases = phases or PhaseConvention()
    return _build(space, lambda lab: lab.c_image(), phases.c)


def build_PT(space, phases=None):
    phases = phases or PhaseConvention()
    return _build(space, lambda lab: lab.pt_image(), phases.pt)


def build_CPT(space, phases=None):
    phases = phases or PhaseConvention()
    return _build(space, lambda lab: lab.cpt_image(), phases.cpt)


def relative_phase(a, b):
    """Best global phase phi with a ~ exp(i phi) b, and the max-abs residual."""
    overlap = np.vdot(b, a)
    if abs(overlap) == 0:
        return 0.0, linalg.max_abs(a - b)
    phi = float(np.angle(overlap))
    factor = 1.0 if phi == 0.0 else np.exp(1j * phi)
    return _wrap(phi), linalg.max_abs(a - factor * b)


def klein_group_report(space, phases=None, tol=linalg.ATOL):
    """Check the Klein four-group law for {1, C, PT, CPT} up to global phases."""
    phases = phases or PhaseConvention()
    ops = {"C": build_C(space, phases), "PT": build_PT(space, phases), "CPT": build_CPT(space, phases)}
    eye = np.eye(space.dim)
    ops["1"] = eye
    report = Report("klein")
    recorded = {}
    for name in ("C", "PT", "CPT"):
        res = linalg.unitarity_residual(ops[name])
        report.add(f"unitary:{name}", res <= tol, res, tol)
    # group law: each non-identity element squares to 1; the product of two
    # distinct non-identity elements is the third
    table = [
        ("C", "C", "1"), ("PT", "PT", "1"), ("CPT", "CPT", "1"),
        ("C", "PT", "CPT"), ("PT", "C", "CPT"),
        ("C", "CPT", "PT"), ("CPT", "C", "PT"),
        ("PT", "CPT", "C"), ("CPT", "PT", "C"),
    ]
    for a, b, target in table:
        phi, res = relative_phase(ops[a] @ ops[b], ops[target])
        key = f"{a}*{b}={target}"
        recorded[key] = phi
        report.add(f"law:{key}", res <= tol, res, tol, f"global phase {phi:.15g}")
    phi, res = relative_phase(ops["CPT"] @ ops["CPT"], eye)
    report.add("z2:CPT^2", res <= tol, res, tol, f"projective phase {phi:.15g}")
    report.data = {"dim": space.dim, "zero_phases": phases.is_zero, "global_phases": recorded}
    return report


@dataclass
class CptSectorDecomposition:
    plus_basis: list
    minus_basis: list
    projective_phase: float = 0.0

    @property
    def dim(self):
        return len(self.plus_basis) + len(self.minus_basis)

    def projector(self, sign):
        basis = self.plus_basis if sign > 0 else self.minus_basis
        if not basis:
            return np.zeros((self.dim, self.dim), dtype=complex)
        v = np.column_stack(basis)
        return v @ v.conj().T


def normalized_involution(cpt):
    """Return (exp(-i phi/2) CPT, phi) where CPT^2 = exp(i phi) I."""
    cpt = linalg.as_matrix(cpt)
    sq = cpt @ cpt
    phi = float(np.angle(sq[0, 0]))
    res = linalg.max_abs(sq - np.exp(1j * phi) * np.eye(cpt.shape[0]))
    if res > 1e-10:
        raise ValidationError(f"CPT^2 is not proportional to the identity (residual {res:.3e})")
    if phi == 0.0:
        return cpt, 0.0
    return np.exp(-0.5j * phi) * cpt, phi


def _is_monomial(m):
    nz = np.abs(m) > 0
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def cpt_eigensectors(cpt):
    """Orthonormal bases of the +1 and -1 eigenspaces of the normalized CPT.

    For phase-decorated permutations (the only operators this package builds)
    the bases are explicit: (e_i +- CPT e_i)/sqrt(2) for each pair i < j.
    """
    op, phi = normalized_involution(cpt)
    d = op.shape[0]
    plus, minus = [], []
    if _is_monomial(op):
        done = set()
        for i in range(d):
            if i in done:
                continue
            col = op[:, i]
            j = int(np.flatnonzero(col)[0])
            done.update((i, j))
            if i == j:
                e = np.zeros(d, dtype=complex)
                e[i] = 1
                (plus if col[i].real > 0 else minus).append(e)
                continue
            e = np.zeros(d, dtype=complex)
            e[i] = 1
            img = op @ e
            plus.append((e + img) / math.sqrt(2))
            minus.append((e - img) / math.sqrt(2))
    else:
        herm = (op + op.conj().T) / 2
        w, v = np.linalg.eigh(herm)
        for val, vec in zip(w, v.T):
            (plus if val > 0 else minus).append(vec)
    return CptSectorDecomposition(plus, minus, phi)


def sector_projectors(cpt):
    op, _ = normalized_involution(cpt)
    eye = np.eye(op.shape[0])
    return (eye + op) / 2, (eye - op) / 2
