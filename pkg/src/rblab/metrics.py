"""Channel distances: Pauli-channel diamond norm with certificates, 1->1 Hermitian norm."""

from typing import NamedTuple
import warnings

import numpy as np

from . import channels as ch
from . import clifford as cl
from .errors import ContractError

OPT_TOL = 1e-6
CERT_TOL = 1e-10


class CertificatePair(NamedTuple):
    primal: float
    dual: float
    primal_feasible: bool
    dual_feasible: bool


class DiamondResult(NamedTuple):
    distance: float
    certificate: CertificatePair


class MinFidelityBound(NamedTuple):
    value: float
    vacuous: bool


def _bell_basis(d):
    """Columns psi_k = (P_k (x) I) psi_0, psi_0 maximally entangled."""
    basis = cl.pauli_basis(int(round(np.log2(d))))
    psi0 = np.eye(d).reshape(-1) / np.sqrt(d)
    return np.stack([np.kron(p, np.eye(d)) @ psi0 for p in basis], axis=1)


def _partial_trace_first(m, d):
    return np.einsum("aiaj->ij", m.reshape(d, d, d, d))


def pauli_certificates(q, r):
    """Evaluate the explicit primal and dual feasible points for ``q - r``.

    Primal: ``W = Pi+/d`` with ``rho = I/d``, value ``<J, W>``. Dual:
    ``Z = Pi+ J Pi+``, value ``||tr_out Z||_inf``. ``Pi+`` projects onto the
    Bell-basis vectors whose probability difference is non-negative.
    """
    v = np.asarray(q, dtype=float) - np.asarray(r, dtype=float)
    d = int(round(np.sqrt(v.size)))
    j = ch.super_to_choi(ch.pauli_channel_to_super(v))
    bell = _bell_basis(d)
    keep = bell[:, v >= 0]
    pi_plus = keep @ keep.conj().T
    eye = np.eye(d * d)

    w = pi_plus / d
    rho = np.eye(d) / d
    primal = float(np.trace(j @ w).real)
    slack = np.kron(eye[:d, :d], rho) - w
    primal_ok = (np.linalg.eigvalsh((slack + slack.conj().T) / 2).min() >= -CERT_TOL
                 and np.linalg.eigvalsh(w).min() >= -CERT_TOL)

    z = pi_plus @ j @ pi_plus
    zh = (z + z.conj().T) / 2
    dual = float(np.abs(np.linalg.eigvalsh(_partial_trace_first(zh, d))).max())
    dual_ok = (np.linalg.eigvalsh(zh - (j + j.conj().T) / 2).min() >= -CERT_TOL
               and np.linalg.eigvalsh(zh).min() >= -CERT_TOL)
    return CertificatePair(primal, dual, bool(primal_ok), bool(dual_ok))


def pauli_diamond_distance(q, r):
    """Diamond distance ``||v||_1`` between Pauli channels with probabilities q, r."""
    q = ch.pauli_channel(q)
    r = ch.pauli_channel(r)
    if q.shape != r.shape:
        raise ContractError(f"dimension mismatch: {q.size} vs {r.size} probabilities")
    v = q - r
    return DiamondResult(float(np.abs(v).sum()), pauli_certificates(q, r))


def diamond_from_r(r, d):
    """``2(d+1)r/d``; equals the diamond distance to identity only for Pauli noise."""
    return 2 * (d + 1) * r / d


def _trace_norm_herm(m):
    return np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2)).sum()


def _vec_batch(x):
    return np.swapaxes(x, -1, -2).reshape(x.shape[0], -1)


def _unvec_batch(v, d):
    return np.swapaxes(v.reshape(-1, d, d), -1, -2)


def _ascend(s, sd, psi, max_iter=500):
    """Alternating maximization of ||R(psi psi^dag)||_1, batched over starts.

    ``psi`` is (k, d); every start runs until none improves by more than 1e-13.
    """
    psi = np.atleast_2d(psi)
    d = psi.shape[1]
    best = np.full(len(psi), -1.0)
    for _ in range(max_iter):
        rho = psi[:, :, None] * psi.conj()[:, None, :]
        out = _unvec_batch(_vec_batch(rho) @ s.T, d)
        out = (out + np.conj(np.swapaxes(out, -1, -2))) / 2
        evals, evecs = np.linalg.eigh(out)
        val = np.abs(evals).sum(axis=1)
        moving = val > best + 1e-13
        best = np.maximum(best, val)
        if not moving.any():
            break
        y = (evecs * np.sign(evals)[:, None, :]) @ np.conj(np.swapaxes(evecs, -1, -2))
        back = _unvec_batch(_vec_batch(y) @ sd.T, d)
        _, vecs = np.linalg.eigh((back + np.conj(np.swapaxes(back, -1, -2))) / 2)
        psi = vecs[:, :, -1]
    return max(float(best.max()), 0.0)


def _bloch_grid_max(s, step_deg=0.5):
    theta = np.deg2rad(np.arange(0.0, 180.0 + step_deg / 2, step_deg))
    phi = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    r = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    basis = cl.pauli_basis(1)
    imgs = np.stack([ch.unvec(s @ ch.vec(p), 2) for p in basis])  # R(I), R(X), R(Y), R(Z)
    imgs = (imgs + np.conj(np.swapaxes(imgs, -1, -2))) / 2
    out = (imgs[0] + np.einsum("...k,kij->...ij", r, imgs[1:])) / 2
    # 2x2 Hermitian: eigenvalues t/2 +- disc, so ||.||_1 = max(|t|, 2 disc)
    a = out[..., 0, 0].real
    b = out[..., 1, 1].real
    disc = np.sqrt(((a - b) / 2) ** 2 + np.abs(out[..., 0, 1]) ** 2)
    vals = np.maximum(np.abs(a + b), 2 * disc)
    k = np.unravel_index(np.argmax(vals), vals.shape)
    t, p = th[k], ph[k]
    psi = np.array([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)])
    return float(vals[k]), psi


def one_one_H_norm(delta, rng=None, restarts=64, grid=True):
    """Induced trace norm over Hermitian inputs, ``max ||R(A)||_1`` with ``||A||_1 <= 1``.

    The maximum is attained on a rank-one projector, so the search runs over
    pure states: each of ``restarts`` random starts alternates between the
    sign operator of the output and the top eigenvector of its Heisenberg
    image, a monotone ascent stopped at relative change 1e-13. For d = 2 a
    0.5 degree Bloch-sphere grid is evaluated too and its best point
    polished. The result is the largest value found, a lower bound on the
    norm that the tests hold to within ``OPT_TOL``.

    Raises
    ------
    ContractError
        If ``delta`` is not Hermiticity preserving.
    """
    s = np.asarray(delta, dtype=complex)
    d = ch.dim(s)
    if not ch.is_hermiticity_preserving(s):
        raise ContractError("1->1 Hermitian norm needs a Hermiticity-preserving map")
    if np.abs(s).max() == 0:
        return 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    sd = ch.adjoint(s)
    psi = rng.standard_normal((restarts, d)) + 1j * rng.standard_normal((restarts, d))
    best = _ascend(s, sd, psi / np.linalg.norm(psi, axis=1, keepdims=True))
    if grid and d == 2:
        val, psi = _bloch_grid_max(s)
        best = max(best, val, _ascend(s, sd, psi))
    return best


def delta_F(e1, e2):
    """Absolute difference of average gate fidelities to the identity."""
    return abs(ch.average_fidelity(e1) - ch.average_fidelity(e2))


def min_fidelity_bound(e1, e2):
    """``1 - ||e1 - e2||_diamond`` for Pauli channels, not clamped.

    A negative value means the bound says nothing; ``vacuous`` is set and a
    warning is issued.
    """
    for e in (e1, e2):
        if not ch.is_pauli_channel(e):
            raise ContractError("min-fidelity bound needs Pauli channels (diamond computable)")
    dist = pauli_diamond_distance(ch.pauli_probabilities(e1), ch.pauli_probabilities(e2))
    value = 1.0 - dist.distance
    if value < 0:
        warnings.warn("minimum-fidelity bound is negative and therefore vacuous", stacklevel=2)
    return MinFidelityBound(value, value < 0)
