"""Dense channel representations on column-stacked vectorized operators.

A superoperator here is a plain ``(d*d, d*d)`` complex ndarray ``S`` with
``vec(Lambda(rho)) = S @ vec(rho)`` and ``vec`` stacking columns
(``reshape(-1, order="F")``). Kraus operators map as
``sum_k conj(A_k) (x) A_k``. The Choi matrix is ``sum_ij Lambda(E_ij) (x) E_ij``
(output factor first), so a channel's Choi trace is ``d``.

Pauli-indexed data (Pauli channel probabilities, chi matrices) follow the
basis order of :func:`rblab.clifford.pauli_basis`.
"""

import numpy as np

from . import clifford as cl
from .errors import ContractError, DomainError

ATOL = 1e-10
PROB_ATOL = 1e-12


def vec(a):
    return np.asarray(a).reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v)
    if d is None:
        d = _dim_from_square(v.size)
    return v.reshape(d, d, order="F")


def _dim_from_square(size):
    d = int(round(np.sqrt(size)))
    if d * d != size:
        raise ContractError(f"size {size} is not a perfect square")
    return d


def dim(s):
    """Hilbert dimension of a superoperator."""
    s = np.asarray(s)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ContractError(f"superoperator must be square, got {s.shape}")
    return _dim_from_square(s.shape[0])


def _nqubits(d):
    n = int(round(np.log2(d)))
    if 2 ** n != d:
        raise ContractError(f"dimension {d} is not a power of two")
    return n


def identity_channel(d):
    return np.eye(d * d, dtype=complex)


def depolarizing(p, d):
    """``rho -> p rho + (1 - p) tr(rho) I/d``; CP iff ``-1/(d^2-1) <= p <= 1``."""
    lo = -1.0 / (d * d - 1)
    if not lo - PROB_ATOL <= p <= 1 + PROB_ATOL:
        raise DomainError(f"depolarizing p={p} outside CP range [{lo}, 1]")
    vid = vec(np.eye(d))
    return p * np.eye(d * d, dtype=complex) + (1 - p) / d * np.outer(vid, vid).astype(complex)


def amplitude_damping(gamma):
    if not 0 <= gamma <= 1:
        raise DomainError(f"damping gamma={gamma} outside [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return kraus_to_super([k0, k1])


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return np.kron(u.conj(), u)


def kraus_to_super(kraus):
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise ContractError("empty Kraus set")
    d = kraus[0].shape[0]
    if any(k.shape != (d, d) for k in kraus):
        raise ContractError("Kraus operators must share a square shape")
    return sum(np.kron(k.conj(), k) for k in kraus)


def super_to_choi(s):
    d = dim(s)
    s4 = np.asarray(s).reshape(d, d, d, d, order="F")
    # s4[a, b, c, e] = <a| Lambda(|c><e|) |b>; Choi index (a, c), (b, e)
    return s4.transpose(0, 2, 1, 3).reshape(d * d, d * d)


def choi_to_super(j):
    d = dim(j)
    s4 = np.asarray(j).reshape(d, d, d, d).transpose(0, 2, 1, 3)
    return s4.reshape(d * d, d * d, order="F")


def choi_to_kraus(j, atol=ATOL):
    """Kraus operators from the eigendecomposition of a PSD Choi matrix."""
    d = dim(j)
    j = np.asarray(j)
    evals, evecs = np.linalg.eigh((j + j.conj().T) / 2)
    if evals.min() < -atol:
        raise ContractError(f"Choi matrix not PSD (min eigenvalue {evals.min():.3g})")
    return [np.sqrt(lam) * evecs[:, k].reshape(d, d)
            for k, lam in enumerate(evals) if lam > atol]


def super_to_kraus(s, atol=ATOL):
    return choi_to_kraus(super_to_choi(s), atol)


def pauli_channel_to_super(q):
    """Superoperator of ``rho -> sum_a q_a P_a rho P_a``."""
    q = np.asarray(q, dtype=float)
    d = _dim_from_square(q.size)
    basis = cl.pauli_basis(_nqubits(d))
    return np.einsum("a,aij,akl->ikjl", q, basis.conj(), basis).reshape(d * d, d * d)


def chi_matrix(s):
    """chi with ``Lambda(rho) = sum_ab chi_ab P_a rho P_b``."""
    d = dim(s)
    basis = cl.pauli_basis(_nqubits(d))
    w = basis.reshape(len(basis), -1).T  # row-major vec(P_a) as columns
    return w.conj().T @ super_to_choi(s) @ w / (d * d)


def pauli_probabilities(s):
    """Diagonal of chi: the Pauli-twirled error probabilities."""
    return chi_matrix(s).diagonal().real.copy()


def is_pauli_channel(s, atol=ATOL):
    chi = chi_matrix(s)
    return bool(np.allclose(chi, np.diag(chi.diagonal()), atol=atol))


def pauli_channel(q):
    """Validate a Pauli probability vector and return it as a float array."""
    q = np.asarray(q, dtype=float)
    _dim_from_square(q.size)
    if q.min() < -PROB_ATOL or abs(q.sum() - 1) > PROB_ATOL:
        raise DomainError("Pauli channel probabilities must be >= 0 and sum to 1")
    return q


def depolarizing_pauli(p, d):
    q = np.full(d * d, (1 - p) / (d * d))
    q[0] = ((d * d - 1) * p + 1) / (d * d)
    return q


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------


def is_trace_preserving(s, atol=ATOL):
    d = dim(s)
    # tr(Lambda(X)) = vec(I)^dag S vec(X) for all X
    return bool(np.allclose(vec(np.eye(d)) @ np.asarray(s), vec(np.eye(d)), atol=atol))


def is_hermiticity_preserving(s, atol=ATOL):
    j = super_to_choi(s)
    return bool(np.allclose(j, j.conj().T, atol=atol))


def is_completely_positive(s, atol=ATOL):
    j = super_to_choi(s)
    if not np.allclose(j, j.conj().T, atol=atol):
        return False
    return bool(np.linalg.eigvalsh((j + j.conj().T) / 2).min() >= -atol)


def is_cptp(s, atol=ATOL):
    return is_trace_preserving(s, atol) and is_completely_positive(s, atol)


def check_cptp(s, what="channel"):
    if not is_trace_preserving(s):
        raise ContractError(f"{what} is not trace preserving")
    if not is_completely_positive(s):
        raise ContractError(f"{what} is not completely positive")


def check_density(rho, atol=ATOL):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ContractError("density matrix must be square")
    if abs(np.trace(rho) - 1) > PROB_ATOL * rho.shape[0] * 100:
        raise ContractError("density matrix must have unit trace")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ContractError("density matrix must be Hermitian")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ContractError("density matrix must be positive semidefinite")
    return rho


def check_effect(e, atol=ATOL):
    e = np.asarray(e, dtype=complex)
    if not np.allclose(e, e.conj().T, atol=atol):
        raise ContractError("POVM element must be Hermitian")
    w = np.linalg.eigvalsh(e)
    if w.min() < -atol or w.max() > 1 + atol:
        raise ContractError("POVM element eigenvalues must lie in [0, 1]")
    return e


# ---------------------------------------------------------------------------
# algebra and figures of merit
# ---------------------------------------------------------------------------


def compose(a, b):
    """``a o b``: apply ``b`` first."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch {a.shape} vs {b.shape}")
    return a @ b


def apply(s, rho):
    d = dim(s)
    rho = np.asarray(rho)
    if rho.shape != (d, d):
        raise ContractError(f"state shape {rho.shape} does not match d={d}")
    return unvec(np.asarray(s) @ vec(rho), d)


def adjoint(s):
    """Hilbert-Schmidt adjoint (Heisenberg picture)."""
    return np.asarray(s).conj().T


def chi00(s):
    """Identity component of the chi matrix, ``tr(S)/d^2``."""
    if not is_trace_preserving(s):
        raise ContractError("chi00 requires a trace-preserving map")
    d = dim(s)
    return float(np.trace(s).real) / (d * d)


def average_fidelity(s):
    """Average gate fidelity to the identity, ``(d chi00 + 1)/(d + 1)``."""
    if not is_trace_preserving(s):
        raise ContractError("average fidelity requires a trace-preserving map")
    d = dim(s)
    return (d * chi00(s) + 1) / (d + 1)


def depolarizing_parameter(s):
    """p of the depolarizing channel with the same average fidelity."""
    d = dim(s)
    return (float(np.trace(s).real) - 1) / (d * d - 1)


def error_rate(s):
    return 1.0 - average_fidelity(s)


def pauli_error_rate(r, d=2):
    if not 0 <= r <= 1:
        raise DomainError(f"error rate r={r} outside [0, 1]")
    return (d + 1) * r / d


def twirl_exact(s, group):
    """Average ``S_C o S o S_C^dag`` over the full Clifford group.

    ``group`` is a :class:`rblab.clifford.CliffordGroup` or a list holding
    every element exactly once; anything else is rejected.
    """
    d = dim(s)
    n = _nqubits(d)
    if isinstance(group, cl.CliffordGroup):
        if group.n != n:
            raise ContractError("group qubit count does not match channel")
        sc = group.superops
    else:
        elements = list(group)
        keys = {g.key() for g in elements}
        if (len(elements) != cl.clifford_group_order(n) or len(keys) != len(elements)
                or any(g.n != n for g in elements)):
            raise ContractError("twirl needs the complete enumerated Clifford group")
        sc = np.stack([cl.to_superoperator(g) for g in elements])
    return np.einsum("gij,jk,glk->il", sc, np.asarray(s), sc.conj()) / len(sc)


def random_unitary(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (r.diagonal() / np.abs(r.diagonal()))


def random_channel(d, rng, rank=None):
    """Random CPTP map from a Stinespring isometry (Haar on the dilation)."""
    rank = rank or d * d
    u = random_unitary(d * rank, rng)
    iso = u[:, :d]
    kraus = [iso[k * d:(k + 1) * d, :] for k in range(rank)]
    return kraus_to_super(kraus)


def random_density(d, rng, rank=None):
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def _complex_array(data):
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ContractError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _pairs(a):
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def channel_from_json(obj):
    """Superoperator from ``{"d", "repr": "kraus"|"pauli"|"super", "data"}``."""
    try:
        d = int(obj["d"])
        kind = obj["repr"]
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"malformed channel JSON: {exc}") from None
    if kind == "kraus":
        s = kraus_to_super(list(_complex_array(data)))
    elif kind == "pauli":
        s = pauli_channel_to_super(pauli_channel(data))
    elif kind == "super":
        s = _complex_array(data)
    else:
        raise ContractError(f"unknown channel repr {kind!r}")
    if dim(s) != d:
        raise ContractError(f"channel data has dimension {dim(s)}, declared {d}")
    return s


def channel_to_json(s, kind="super"):
    d = dim(s)
    if kind == "super":
        data = _pairs(s)
    elif kind == "kraus":
        data = [_pairs(k) for k in super_to_kraus(s)]
    elif kind == "pauli":
        if not is_pauli_channel(s):
            raise ContractError("channel is not a Pauli channel")
        data = pauli_probabilities(s).tolist()
    else:
        raise ContractError(f"unknown channel repr {kind!r}")
    return {"d": d, "repr": kind, "data": data}
