"""Monte-Carlo simulation of the two-party Z2 frame-alignment protocol.

Alice sends N copies of |psi> (frame g = 0) or of CPT|psi> (g = 1). Bob
applies the optimal two-outcome (Helstrom) measurement and guesses g.
Discrimination depends only on the overlap <psi|CPT|psi>, so the N-copy
states are built inside the 2-d span of {psi, CPT psi}, giving 2^N
dimensions instead of d^N.

Seed scheme: ``SeedSequence(seed).spawn(k)`` yields one child per chunk of
``CHUNK`` trials; chunk error counts are merged by summation.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .cpt import build_CPT
from .errors import CapacityError, DomainError, ValidationError
from .report import Report
from .resource import alignment_rate, standard_form, standard_form_state
from .spin import massive_spin_s_space

CHUNK = 1000


def overlap(psi, cpt):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return complex(np.vdot(psi, linalg.as_matrix(cpt) @ psi))


def helstrom_error(overlap_mag, N):
    """Minimum error for two equiprobable pure states with |<a|b>| = overlap_mag, N copies."""
    c = float(overlap_mag)
    if not 0.0 <= c <= 1.0 + 1e-12:
        raise DomainError(f"overlap magnitude {c} outside [0, 1]")
    if N < 1:
        raise DomainError("N must be at least 1")
    c = min(c, 1.0)
    return helstrom_error_from_sine(math.sqrt(max(0.0, 1.0 - c * c)), N)


def helstrom_error_from_sine(sine, N):
    """Same bound from s = sqrt(1 - |<a|b>|^2); well conditioned as the overlap tends to 1."""
    s2 = min(float(sine) ** 2, 1.0)
    if N < 1:
        raise DomainError("N must be at least 1")
    gap = 1.0 if s2 == 1.0 else -math.expm1(N * math.log1p(-s2))
    return (1.0 - math.sqrt(max(0.0, gap))) / 2.0


@dataclass
class AlignmentExperiment:
    psi: np.ndarray
    N: int
    seed: int = 0
    g_true: int | None = None  # None draws g uniformly per trial

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex).reshape(-1)
        if self.N < 1:
            raise ValidationError("N must be at least 1")
        norm = np.linalg.norm(self.psi)
        if abs(norm - 1) > linalg.ATOL:
            raise ValidationError(f"psi is not normalized (norm {norm:.15g})")
        if self.g_true not in (None, 0, 1):
            raise ValidationError("g_true must be 0, 1 or None")


def _reduced_pair(psi, cpt):
    """Coordinates of psi and CPT psi in an orthonormal basis of their span."""
    a = psi
    b = linalg.as_matrix(cpt) @ psi
    ov = np.vdot(a, b)
    perp = np.linalg.norm(b - ov * a)
    return np.array([1.0, 0.0], dtype=complex), np.array([ov, perp], dtype=complex)


def helstrom_success(a, b):
    """P(correct | a), P(correct | b) for the optimal measurement, equal priors.

    The optimal projector lies in span{a, b}, so the problem is solved in an
    orthonormal basis of that span whatever the ambient dimension.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    q, _ = np.linalg.qr(np.column_stack([a, b]))
    ar, br = q.conj().T @ a, q.conj().T @ b
    gamma = linalg.projector(ar) - linalg.projector(br)
    w, v = np.linalg.eigh(gamma)
    pos = v[:, w > 0]
    pa = float(np.linalg.norm(pos.conj().T @ ar) ** 2)
    pb = 1.0 - float(np.linalg.norm(pos.conj().T @ br) ** 2)
    return min(max(pa, 0.0), 1.0), min(max(pb, 0.0), 1.0)


def n_copy_success(psi, cpt, N, cap=None):
    cap = linalg.dimension_cap() if cap is None else cap
    if 2**N > cap:
        raise CapacityError(f"2^{N} copies exceed the cap {cap}; use the closed form")
    a1, b1 = _reduced_pair(psi, cpt)
    a = linalg.kron_vectors([a1] * N, cap=cap)
    b = linalg.kron_vectors([b1] * N, cap=cap)
    return helstrom_success(a, b)


def _mutual_information(joint):
    joint = joint / joint.sum()
    pg = joint.sum(axis=1)
    pguess = joint.sum(axis=0)
    mi = 0.0
    for i in range(2):
        for j in range(2):
            if joint[i, j] > 0:
                mi += joint[i, j] * math.log2(joint[i, j] / (pg[i] * pguess[j]))
    return mi if mi > 0 else 0.0


def simulate(success, trials, seed, g_true=None):
    """Sample guesses; returns the 2x2 joint count table [g, guess]."""
    joint = np.zeros((2, 2), dtype=np.int64)
    n_chunks = max(1, math.ceil(trials / CHUNK))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    p_ok = np.array(success)
    remaining = trials
    for child in children:
        size = min(CHUNK, remaining)
        remaining -= size
        rng = np.random.default_rng(child)
        g = rng.integers(0, 2, size=size) if g_true is None else np.full(size, g_true)
        correct = rng.random(size) < p_ok[g]
        guess = np.where(correct, g, 1 - g)
        np.add.at(joint, (g, guess), 1)
    return joint


def run_experiment(exp, cpt, trials=10_000, mode="explicit", sigmas=3.0):
    """Simulate ``trials`` protocol rounds and compare with the closed form."""
    if trials < 1:
        raise ValidationError("trials must be positive")
    ov = overlap(exp.psi, cpt)
    _, b1 = _reduced_pair(exp.psi, cpt)
    closed = helstrom_error_from_sine(b1[1].real, exp.N)
    report = Report("alignment", seed=exp.seed)
    if mode == "explicit":
        success = n_copy_success(exp.psi, cpt, exp.N)
        p_err_meas = 1.0 - 0.5 * (success[0] + success[1])
        diff = abs(p_err_meas - closed)
        report.add("measurement_matches_closed_form", diff <= linalg.SPECTRAL_TOL, diff,
                   linalg.SPECTRAL_TOL, "explicit Helstrom measurement on 2^N dims")
    elif mode == "closed":
        success = (1.0 - closed, 1.0 - closed)
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    joint = simulate(success, trials, exp.seed, exp.g_true)
    errors = int(joint[0, 1] + joint[1, 0])
    emp = errors / trials
    sigma = math.sqrt(closed * (1 - closed) / trials)
    stderr = math.sqrt(emp * (1 - emp) / trials)
    bound = sigmas * sigma
    dev = abs(emp - closed)
    report.add("empirical_vs_closed_form", dev <= bound, dev, bound,
               f"{sigmas:g} binomial standard deviations")
    sf = standard_form(exp.psi, cpt)
    report.data = {
        "N": exp.N,
        "trials": trials,
        "overlap": [ov.real, ov.imag],
        "q0": sf.q0,
        "alignment_rate": alignment_rate(min(max(sf.q0, 0.0), 1.0)),
        "closed_form_error": closed,
        "empirical_error": emp,
        "stderr": stderr,
        "mutual_information_bits": _mutual_information(joint.astype(float)),
        "joint_counts": joint.tolist(),
        "mode": mode,
    }
    return report


def default_cpt():
    return build_CPT(massive_spin_s_space(1, explicit=False))


def sweep(q0_grid, n_grid, trials=10_000, seed=0, cpt=None, mode="explicit"):
    """One row per (q0, N): rate, closed-form error, empirical error, stderr."""
    q0_grid = list(q0_grid)
    n_grid = list(n_grid)
    if not q0_grid or not n_grid:
        raise ValidationError("sweep grids must be non-empty")
    cpt = default_cpt() if cpt is None else cpt
    seeds = np.random.SeedSequence(seed).spawn(len(q0_grid) * len(n_grid))
    rows = []
    for i, q0 in enumerate(q0_grid):
        psi = standard_form_state(q0, cpt)
        for j, N in enumerate(n_grid):
            child = seeds[i * len(n_grid) + j]
            exp = AlignmentExperiment(psi, int(N), seed=int(child.generate_state(1)[0]))
            rep = run_experiment(exp, cpt, trials=trials, mode=mode)
            rows.append({
                "q0": float(q0),
                "N": int(N),
                "alignment_rate": alignment_rate(q0),
                "closed_form_error": rep.data["closed_form_error"],
                "empirical_error": rep.data["empirical_error"],
                "stderr": rep.data["stderr"],
                "pass": rep.passed,
            })
    return rows


SWEEP_COLUMNS = ("q0", "N", "alignment_rate", "closed_form_error", "empirical_error", "stderr")


def write_sweep_csv(rows, fp):
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        rate = "inf" if math.isinf(r["alignment_rate"]) else repr(r["alignment_rate"])
        writer.writerow([repr(r["q0"]), r["N"], rate, repr(r["closed_form_error"]),
                         repr(r["empirical_error"]), repr(r["stderr"])])
