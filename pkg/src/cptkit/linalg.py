"""Dense complex linear algebra used across the toolkit.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Kronecker
products follow the row-major convention with the left factor varying
slowest, i.e. ``tensor(a, b)[i*db + k, j*db + l] == a[i, j] * b[k, l]``.
Every basis ordering in the package is documented against this convention.
"""

import json
import os
from functools import reduce

import numpy as np

from .errors import CapacityError, ShapeError, ValidationError

ATOL = 1e-12
SPECTRAL_TOL = 1e-10
EIG_CLAMP = 1e-14
DEFAULT_CAP = 2**20


def dimension_cap():
    """Total-dimension cap for explicit tensor constructions.

    ``CPTKIT_CAP`` in the environment overrides the default of 2**20.
    """
    raw = os.environ.get("CPTKIT_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValidationError(f"CPTKIT_CAP must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValidationError("CPTKIT_CAP must be positive")
    return cap


def as_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def max_abs(a):
    """Max-abs entry norm, the residual norm used throughout."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def unitarity_residual(u):
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ShapeError(f"unitary must be square, got {u.shape}")
    return max_abs(u.conj().T @ u - np.eye(u.shape[0]))


def hermiticity_residual(h):
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeError(f"expected a square matrix, got {h.shape}")
    return max_abs(h - h.conj().T)


def is_unitary(u, tol=ATOL):
    return unitarity_residual(u) <= tol


def check_density(rho, tol=ATOL, spectral_tol=SPECTRAL_TOL):
    """Raise ValidationError unless ``rho`` is a density matrix."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"density matrix must be square, got {rho.shape}")
    herm = hermiticity_residual(rho)
    if herm > tol:
        raise ValidationError(f"not Hermitian (residual {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValidationError(f"trace {tr.real:.15g} differs from 1")
    lam_min = float(np.linalg.eigvalsh(rho).min())
    if lam_min < -spectral_tol:
        raise ValidationError(f"negative eigenvalue {lam_min:.3e}")
    return rho


def projector(psi):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def tensor(a, b, cap=None):
    """Kronecker product ``a (x) b``, left factor slowest."""
    a = as_matrix(a)
    b = as_matrix(b)
    cap = dimension_cap() if cap is None else cap
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise CapacityError(f"tensor dimension {max(rows, cols)} exceeds cap {cap}")
    return np.kron(a, b)


def tensor_all(factors, cap=None):
    return reduce(lambda x, y: tensor(x, y, cap=cap), factors)


def kron_vectors(vectors, cap=None):
    """Tensor product of state vectors (same index convention as ``tensor``)."""
    cap = dimension_cap() if cap is None else cap
    dim = int(np.prod([len(v) for v in vectors]))
    if dim > cap:
        raise CapacityError(f"tensor dimension {dim} exceeds cap {cap}")
    return reduce(np.kron, [np.asarray(v, dtype=complex) for v in vectors])


def partial_trace(rho, site_dims, keep):
    """Trace out every site not listed in ``keep``.

    ``site_dims`` lists the local dimensions in tensor order. The kept sites
    stay in their original relative order.
    """
    rho = as_matrix(rho)
    dims = [int(d) for d in site_dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ShapeError(f"site dims {dims} imply dimension {total}, rho is {rho.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {len(dims)} sites")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # trace out from the highest index down so earlier axis numbers stay valid
    for site in reversed(range(n)):
        if site in keep:
            continue
        cur = t.ndim // 2
        t = np.trace(t, axis1=site, axis2=site + cur)
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kd, kd)


def von_neumann_entropy(rho):
    """Entropy in bits, eigenvalues below 1e-14 treated as zero."""
    rho = check_density(rho)
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > EIG_CLAMP]
    s = float(-np.sum(lam * np.log2(lam)))
    return s if s > 0 else 0.0


def purity(rho):
    rho = as_matrix(rho)
    return float(np.real(np.trace(rho @ rho)))


def propagator(H, t, tol=ATOL):
    """exp(-iHt) through the eigendecomposition of Hermitian ``H``."""
    H = as_matrix(H)
    herm = hermiticity_residual(H)
    if herm > tol:
        raise ValidationError(f"Hamiltonian is not Hermitian (residual {herm:.3e})")
    w, v = np.linalg.eigh((H + H.conj().T) / 2)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(rho, H, t, tol=ATOL):
    U = propagator(H, t, tol=tol)
    rho = as_matrix(rho)
    if rho.shape != U.shape:
        raise ShapeError(f"rho {rho.shape} and H {U.shape} differ in shape")
    if t == 0:
        return rho.copy()
    return U @ rho @ U.conj().T


def evolve_state(psi, H, t, tol=ATOL):
    psi = np.asarray(psi, dtype=complex)
    if t == 0:
        return psi.copy()
    return propagator(H, t, tol=tol) @ psi


# -- interchange format -----------------------------------------------------

def matrix_to_dict(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    rows, cols = m.shape
    entries = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return {"rows": rows, "cols": cols, "entries": entries}


def matrix_from_dict(doc):
    try:
        rows = int(doc["rows"])
        cols = int(doc["cols"])
        entries = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix document: {exc}") from exc
    if len(entries) != rows * cols:
        raise ShapeError(f"{len(entries)} entries for a {rows}x{cols} matrix")
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return flat.reshape(rows, cols)


def dump_matrix(m, fp):
    json.dump(matrix_to_dict(m), fp, indent=1)


def load_matrix(fp):
    return matrix_from_dict(json.load(fp))
