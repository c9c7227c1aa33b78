"""Encoding quantum information inside one CPT eigensector.

Every vector in a CPT eigensector is mapped to itself (up to the sector sign)
by CPT, so a message written into the sector needs no shared matter-antimatter
frame to be read back. Z2 irreps are one-dimensional, so the code space is the
whole sector.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .cpt import build_CPT, cpt_eigensectors, sector_projectors
from .errors import PreconditionError, StructureError, ValidationError
from .report import Report
from .resource import QuantumChannel, is_g_covariant, is_g_invariant, twirl_channel, z2_rep
from .spin import massive_spin_s_space, massless_allowed_states


@dataclass
class DfsCode:
    sector: int
    codewords: list
    cpt: np.ndarray

    @property
    def logical_dim(self):
        return len(self.codewords)

    @property
    def capacity_qubits(self):
        return math.log2(self.logical_dim)

    @property
    def matrix(self):
        """Columns are the codewords."""
        return np.column_stack(self.codewords)

    @property
    def projector(self):
        v = self.matrix
        return v @ v.conj().T


def _sector_sign(sector):
    if sector in (1, "+", "plus"):
        return 1
    if sector in (-1, "-", "minus"):
        return -1
    raise ValidationError(f"sector must be + or -, got {sector!r}")


def build_code(space, cpt=None, sector=1):
    cpt = build_CPT(space) if cpt is None else linalg.as_matrix(cpt)
    sign = _sector_sign(sector)
    sectors = cpt_eigensectors(cpt)
    words = sectors.plus_basis if sign > 0 else sectors.minus_basis
    if not words:
        raise StructureError(f"the {'+' if sign > 0 else '-'} sector is empty")
    return DfsCode(sign, list(words), cpt)


def capacity(spin2, massive=True):
    """Logical qubits of one sector, from the label-only construction."""
    space = massive_spin_s_space(spin2, explicit=False) if massive else \
        massless_allowed_states(spin2, explicit=False)
    return build_code(space).capacity_qubits


def encode(message, code, tol=linalg.ATOL):
    m = np.asarray(message, dtype=complex).reshape(-1)
    if m.shape != (code.logical_dim,):
        raise ValidationError(f"message length {m.size} != logical dimension {code.logical_dim}")
    norm = np.linalg.norm(m)
    if abs(norm - 1) > tol:
        raise ValidationError(f"message is not normalized (norm {norm:.15g})")
    return code.matrix @ m


def decode(state, code):
    """(message, residual): codeword overlaps and the out-of-code norm."""
    psi = np.asarray(state, dtype=complex).reshape(-1)
    v = code.matrix
    msg = v.conj().T @ psi
    residual = float(np.linalg.norm(psi - v @ msg))
    return msg, residual


def random_message(dim, rng):
    m = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return m / np.linalg.norm(m)


# -- covariant noise ----------------------------------------------------------

def sector_dephasing(cpt, p=0.5):
    """With probability p apply the relative sign P+ - P- between sectors."""
    plus, minus = sector_projectors(cpt)
    d = plus.shape[0]
    return QuantumChannel([math.sqrt(1 - p) * np.eye(d), math.sqrt(p) * (plus - minus)])


def code_depolarizing(code, p):
    """(1-p) rho + p * (code-space average), identity outside the code."""
    v = code.matrix
    d = v.shape[0]
    k = code.logical_dim
    proj = code.projector
    ops = [math.sqrt(1 - p) * np.eye(d)]
    outside = np.eye(d) - proj
    if linalg.max_abs(outside) > 0:
        ops.append(math.sqrt(p) * outside)
    for a in range(k):
        for b in range(k):
            ops.append(math.sqrt(p / k) * np.outer(v[:, a], v[:, b].conj()))
    return QuantumChannel(ops)


def depolarizing_fidelity(p, logical_dim):
    """Closed-form fidelity of a pure code state after code_depolarizing."""
    return 1 - p + p / logical_dim


def make_noise(name, code, p=None):
    if name == "twirl":
        return twirl_channel(z2_rep(code.cpt))
    if name == "dephase":
        return sector_dephasing(code.cpt, 0.5 if p is None else p)
    if name == "depolarize":
        return code_depolarizing(code, 0.1 if p is None else p)
    raise ValidationError(f"unknown noise model {name!r}")


def covariant_noise_trial(code, message, noise, trials=1000, seed=0, tol=linalg.ATOL):
    """Decode fidelity under covariant noise, sampled along Kraus trajectories.

    ``message`` may be a vector or "random" (fresh random message per trial).
    Each trial picks Kraus operator K with probability ||K psi||^2, decodes the
    post-noise state and records |<m|m'>|^2.
    """
    rep = z2_rep(code.cpt)
    ok, res = is_g_covariant(noise, rep)
    if not ok:
        raise PreconditionError(f"noise channel is not CPT-covariant (residual {res:.3e})")
    rng = np.random.default_rng(seed)
    fids = np.empty(trials)
    exact = np.empty(trials)
    for t in range(trials):
        m = random_message(code.logical_dim, rng) if isinstance(message, str) else np.asarray(message)
        psi = encode(m, code)
        outs = [k @ psi for k in noise.kraus_ops]
        probs = np.array([np.vdot(o, o).real for o in outs])
        probs = probs / probs.sum()
        pick = rng.choice(len(outs), p=probs)
        out = outs[pick] / math.sqrt(np.vdot(outs[pick], outs[pick]).real)
        decoded, _ = decode(out, code)
        fids[t] = abs(np.vdot(m, decoded)) ** 2
        rho_out = noise(linalg.projector(psi))
        exact[t] = np.vdot(psi, rho_out @ psi).real
    mean = float(fids.mean())
    stderr = float(fids.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    report = Report("dfs-noise", seed=seed)
    report.add("noise_covariant", True, res, tol)
    report.data = {
        "logical_dim": code.logical_dim,
        "trials": trials,
        "mean_fidelity": mean,
        "stderr": stderr,
        "min_fidelity": float(fids.min()),
        "channel_fidelity_mean": float(exact.mean()),
    }
    return report


def dfs_report(space, n_messages=100, seed=0, tol=linalg.ATOL, sector=1):
    """Round trips, CPT eigen-property, capacity and invariance of encodings."""
    cpt = build_CPT(space)
    code = build_code(space, cpt, sector)
    rep = z2_rep(cpt)
    rng = np.random.default_rng(seed)
    worst_rt = worst_fid = worst_eig = worst_inv = 0.0
    for _ in range(n_messages):
        m = random_message(code.logical_dim, rng)
        psi = encode(m, code)
        back, residual = decode(psi, code)
        worst_rt = max(worst_rt, linalg.max_abs(back - m), residual)
        worst_fid = max(worst_fid, abs(1 - abs(np.vdot(m, back)) ** 2))
        worst_eig = max(worst_eig, linalg.max_abs(cpt @ psi - code.sector * psi))
        _, inv = is_g_invariant(linalg.projector(psi), rep, tol)
        worst_inv = max(worst_inv, inv)
    expected_dim = 2 * (space.spin2 + 1) if space.massive else 4
    report = Report("dfs", seed=seed)
    report.add("round_trip", worst_rt <= tol, worst_rt, tol, f"{n_messages} random messages")
    report.add("round_trip_fidelity", worst_fid <= tol, worst_fid, tol)
    report.add("encoded_states_are_cpt_eigenvectors", worst_eig <= tol, worst_eig, tol)
    report.add("encoded_projectors_invariant", worst_inv <= tol, worst_inv, tol)
    report.add("logical_dimension", code.logical_dim == expected_dim, abs(code.logical_dim - expected_dim), 0,
               f"logical_dim {code.logical_dim}")
    report.data = {
        "spin2": space.spin2,
        "massive": space.massive,
        "sector": "+" if code.sector > 0 else "-",
        "logical_dim": code.logical_dim,
        "capacity_qubits": code.capacity_qubits,
    }
    return report
