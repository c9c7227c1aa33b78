"""CPT on test functions of a discretized, symmetric momentum axis.

The continuum label p is replaced by a grid symmetric under p -> -p. A test
function assigns an amplitude to every (u_sign, spin_z, grid point); the grid
inner product is ``sum conj(phi) psi * step``. The delta normalization of the
continuum reduces here to two exact statements: every fixed-|p| block of the
grid CPT is unitary, and every block connecting different |p| is zero.

Grid basis order: shells by increasing |p|; inside a shell the canonical
:class:`~cptkit.spin.SpinSpace` order (u, then sign of p, then spin_z
descending), so each shell block lines up label-for-label with the fixed-p
operator from :mod:`cptkit.cpt`.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .cpt import PhaseConvention, build_CPT
from .errors import GridLookupError, StructureError, ValidationError
from .report import Report
from .spin import massive_spin_s_space

DEFAULT_POINTS = 32
DEFAULT_PMAX = 4.0
DEFAULT_WIDTH = 1.0
DECAY_RATIO = 1e-6


@dataclass(frozen=True)
class MomentumGrid:
    n: int = DEFAULT_POINTS
    p_max: float = DEFAULT_PMAX
    include_zero: bool = False

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValidationError("grid needs an even, positive number of nonzero points")
        if self.p_max <= 0:
            raise ValidationError("p_max must be positive")

    @property
    def step(self):
        return self.p_max / (self.n // 2)

    @property
    def n_shells(self):
        return self.n // 2

    @property
    def points(self):
        k = np.arange(1, self.n // 2 + 1)
        pos = k * self.step
        mid = [0.0] if self.include_zero else []
        return np.concatenate([-pos[::-1], mid, pos])

    @property
    def magnitudes(self):
        k = np.arange(1, self.n // 2 + 1) * self.step
        return np.concatenate([[0.0], k]) if self.include_zero else k

    def is_symmetric(self):
        pts = self.points
        return bool(np.array_equal(pts, -pts[::-1]))

    def mirror(self, idx):
        return len(self.points) - 1 - idx

    def index_of(self, p):
        pts = self.points
        hits = np.flatnonzero(np.isclose(pts, p, rtol=0, atol=self.step * 1e-9))
        if not len(hits):
            raise GridLookupError(f"momentum {p} is not on the grid")
        return int(hits[0])

    def shell_of(self, magnitude):
        hits = np.flatnonzero(np.isclose(self.magnitudes, magnitude, rtol=0, atol=self.step * 1e-9))
        if not len(hits):
            raise GridLookupError(f"|p| = {magnitude} is not a grid shell")
        return int(hits[0])

    def to_dict(self):
        return {"n": self.n, "p_max": self.p_max, "include_zero": self.include_zero}


def internal_labels(space):
    """Distinct (u_sign, spin_z2) pairs of a space, in canonical order."""
    seen = []
    for lab in space.labels:
        key = (lab.u_sign, lab.spin_z2)
        if key not in seen:
            seen.append(key)
    return seen


def _shell_phases(phases, shell):
    if phases is None:
        return PhaseConvention()
    if isinstance(phases, PhaseConvention):
        return phases
    return phases[shell]


@dataclass
class TestFunction:
    """Amplitudes ``values[i, j]`` for internal label i at grid point j."""

    __test__ = False  # not a pytest class

    grid: MomentumGrid
    labels: list
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.labels), len(self.grid.points)):
            raise ValidationError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.labels)} labels x {len(self.grid.points)} points")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("test function values must be finite")

    def inner(self, other):
        return complex(np.vdot(self.values, other.values) * self.grid.step)

    def norm(self):
        return math.sqrt(self.inner(self).real)

    def normalized(self):
        return TestFunction(self.grid, self.labels, self.values / self.norm())

    def decays(self, ratio=DECAY_RATIO):
        """Amplitudes on the two outermost shells stay below ``ratio`` x max."""
        peak = np.max(np.abs(self.values))
        if peak == 0:
            return True
        m = len(self.grid.points)
        edge = np.abs(self.values[:, [0, 1, m - 2, m - 1]])
        return bool(np.max(edge) < ratio * peak)

    def __add__(self, other):
        return TestFunction(self.grid, self.labels, self.values + other.values)

    def __mul__(self, scalar):
        return TestFunction(self.grid, self.labels, self.values * scalar)

    __rmul__ = __mul__

    def to_dict(self):
        rows = []
        for i, (u, m2) in enumerate(self.labels):
            for j in range(len(self.grid.points)):
                z = self.values[i, j]
                if z != 0:
                    rows.append([u, m2, j, float(z.real), float(z.imag)])
        return {"grid": self.grid.to_dict(), "values": rows}

    @classmethod
    def from_dict(cls, doc, labels):
        g = doc["grid"]
        grid = MomentumGrid(int(g["n"]), float(g["p_max"]), bool(g.get("include_zero", False)))
        values = np.zeros((len(labels), len(grid.points)), dtype=complex)
        index = {lab: i for i, lab in enumerate(labels)}
        for u, m2, j, re, im in doc["values"]:
            values[index[(int(u), int(m2))], int(j)] = complex(re, im)
        return cls(grid, list(labels), values)


def gaussian_testfn(grid, labels, amplitudes, center=0.0, width=DEFAULT_WIDTH):
    """amplitudes[i] * exp(-((p - center)/width)^2), normalized on the grid."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1, 1)
    profile = np.exp(-(((grid.points - center) / width) ** 2))
    return TestFunction(grid, list(labels), amps * profile).normalized()


def random_wavepacket(grid, labels, rng):
    amps = rng.normal(size=len(labels)) + 1j * rng.normal(size=len(labels))
    center = rng.uniform(-1.0, 1.0)
    width = rng.uniform(0.4, 0.7)
    return gaussian_testfn(grid, labels, amps, center, width)


def cpt_on_testfn(phi, phases=None):
    """(CPT phi)(u, s, p) = exp(i theta(u, s, p)) phi(-u, -s, -p)."""
    grid = phi.grid
    if not grid.is_symmetric():
        raise StructureError("momentum grid is not symmetric under p -> -p")
    index = {lab: i for i, lab in enumerate(phi.labels)}
    pts = grid.points
    out = np.zeros_like(phi.values)
    for i, (u, m2) in enumerate(phi.labels):
        src = index.get((-u, -m2))
        if src is None:
            raise StructureError(f"label {(u, m2)} has no CPT partner")
        for j, p in enumerate(pts):
            shell = grid.shell_of(abs(p))
            p_sign = 1 if p >= 0 else -1
            theta = _shell_phases(phases, shell).cpt((u, m2, p_sign))
            factor = 1.0 if theta == 0.0 else np.exp(1j * theta)
            out[i, j] = factor * phi.values[src, grid.mirror(j)]
    return TestFunction(grid, phi.labels, out)


def grid_basis(grid, space):
    """Ordered (label index, grid index) pairs spanning the grid space."""
    labels = internal_labels(space)
    index = {lab: i for i, lab in enumerate(labels)}
    order = []
    for mag in grid.magnitudes:
        signs = (1,) if mag == 0 else (1, -1)
        for u in (1, -1):
            for p_sign in signs:
                j = grid.index_of(p_sign * mag)
                for lab in space.labels:
                    if lab.u_sign == u and lab.p_sign == 1:
                        order.append((index[(u, lab.spin_z2)], j))
    return order


def grid_cpt_matrix(grid, space, phases=None):
    """Matrix of CPT on the grid space; column y holds exp(i theta_y) e_{-y}."""
    if not grid.is_symmetric():
        raise StructureError("momentum grid is not symmetric under p -> -p")
    labels = internal_labels(space)
    basis = grid_basis(grid, space)
    pos = {b: k for k, b in enumerate(basis)}
    index = {lab: i for i, lab in enumerate(labels)}
    pts = grid.points
    op = np.zeros((len(basis), len(basis)), dtype=complex)
    for k, (i, j) in enumerate(basis):
        u, m2 = labels[i]
        p = pts[j]
        target = pos[(index[(-u, -m2)], grid.mirror(j))]
        theta = _shell_phases(phases, grid.shell_of(abs(p))).cpt((u, m2, 1 if p >= 0 else -1))
        op[target, k] = 1.0 if theta == 0.0 else np.exp(1j * theta)
    return op


def testfn_to_vector(phi, space):
    """Grid-basis coordinates of phi, scaled by sqrt(step) so the Euclidean
    inner product equals the grid inner product."""
    basis = grid_basis(phi.grid, space)
    return np.array([phi.values[i, j] for i, j in basis]) * math.sqrt(phi.grid.step)


def _shell_slices(grid, space):
    per_shell = []
    start = 0
    d = space.dim
    for mag in grid.magnitudes:
        size = d // 2 if mag == 0 else d
        per_shell.append(slice(start, start + size))
        start += size
    return per_shell


def shell_restriction(phases, grid, shell_p, space=None):
    """Block of the grid CPT on the shell |p| = shell_p."""
    space = space or massive_spin_s_space(1, explicit=False)
    shell = grid.shell_of(shell_p)
    op = grid_cpt_matrix(grid, space, phases)
    sl = _shell_slices(grid, space)[shell]
    return op[sl, sl]


def no_shell_mixing_check(phases, grid, space=None, operator=None):
    """Every block connecting two different shells must be exactly zero."""
    space = space or massive_spin_s_space(1, explicit=False)
    op = grid_cpt_matrix(grid, space, phases) if operator is None else linalg.as_matrix(operator)
    slices = _shell_slices(grid, space)
    report = Report("no-shell-mixing")
    mags = grid.magnitudes
    for a, sa in enumerate(slices):
        for b, sb in enumerate(slices):
            if a == b:
                continue
            block = op[sa, sb]
            nz = np.argwhere(block != 0)
            worst = linalg.max_abs(block)
            note = ""
            if len(nz):
                r, c = nz[0]
                note = f"nonzero entry at ({sa.start + r}, {sb.start + c})"
            report.add(f"offshell:{mags[a]:g}<-{mags[b]:g}", len(nz) == 0, worst, 0.0, note)
    return report


def momentum_report(space=None, phases=None, grid=None, n_random=100, seed=0, tol=linalg.ATOL):
    """Norm preservation, shell structure and fixed-p reproduction on the grid."""
    space = space or massive_spin_s_space(1, explicit=False)
    grid = grid or MomentumGrid()
    rng = np.random.default_rng(seed)
    labels = internal_labels(space)
    report = Report("momentum", seed=seed)
    op = grid_cpt_matrix(grid, space, phases)
    worst_norm = 0.0
    worst_inner = 0.0
    worst_match = 0.0
    all_decay = True
    packets = [random_wavepacket(grid, labels, rng) for _ in range(n_random)]
    images = [cpt_on_testfn(phi, phases) for phi in packets]
    for phi, img in zip(packets, images):
        worst_norm = max(worst_norm, abs(img.norm() - phi.norm()))
        all_decay &= phi.decays()
        vec = testfn_to_vector(phi, space)
        worst_match = max(worst_match, linalg.max_abs(op @ vec - testfn_to_vector(img, space)))
    for a in range(0, n_random - 1, 2):
        worst_inner = max(worst_inner, abs(images[a].inner(images[a + 1]) - packets[a].inner(packets[a + 1])))
    report.add("norm_preserved", worst_norm <= tol, worst_norm, tol, f"{n_random} random wavepackets")
    report.add("inner_product_preserved", worst_inner <= tol, worst_inner, tol)
    report.add("wavepackets_decay", all_decay, 0.0, DECAY_RATIO, "outer two shells below 1e-6 of peak")
    report.add("matrix_matches_pointwise_action", worst_match <= tol, worst_match, tol)
    mixing = no_shell_mixing_check(phases, grid, space, operator=op)
    offshell = max((c.residual for c in mixing.checks), default=0.0)
    report.add("offshell_blocks_zero", mixing.passed, offshell, 0.0,
               f"{len(mixing.checks)} off-shell blocks")
    slices = _shell_slices(grid, space)
    worst_unit = 0.0
    reproduce = True
    for shell, (mag, sl) in enumerate(zip(grid.magnitudes, slices)):
        block = op[sl, sl]
        worst_unit = max(worst_unit, linalg.unitarity_residual(block))
        if mag != 0:
            fixed = build_CPT(space, _shell_phases(phases, shell))
            reproduce &= bool(np.array_equal(block, fixed))
    report.add("shell_blocks_unitary", worst_unit <= tol, worst_unit, tol)
    report.add("shell_blocks_match_fixed_p", reproduce, 0.0, 0.0, "exact equality")
    report.data = {"grid": grid.to_dict(), "dim": op.shape[0], "internal_labels": labels}
    return report
