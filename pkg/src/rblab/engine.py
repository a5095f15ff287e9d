"""Randomized-benchmarking protocol, simulation, exact averages and diagnostics.

Time steps are numbered from 1; in a length-``m`` sequence the inverse
element sits at step ``m + 1``. A noisy gate at step ``j`` is
``Lambda_{i,j} o C_i`` with ``C_i`` the ideal Clifford superoperator.

For n <= 2 Clifford elements are addressed by their index in the
enumerated group (:func:`rblab.clifford.clifford_group`); gate-dependent
noise is an array over that index. For n = 3 gate-dependent noise attaches
to the generators H, S, CNOT (and optionally X, Y, Z) of each element's
decomposition.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg as sla

from . import channels as ch
from . import clifford as cl
from . import metrics
from .errors import CapacityError, ContractError, DomainError, UnsupportedModeError

MODES = ("gate_independent", "gate_dependent", "time_dependent", "generator")


# ---------------------------------------------------------------------------
# noise models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Error channels ``Lambda_{i,j}``.

    ``channels`` has shape ``(d2, d2)`` for gate_independent, ``(G, d2, d2)``
    for gate_dependent and ``(T, G, d2, d2)`` for time_dependent (row ``j-1``
    holds step ``j``). generator mode stores a dict from gate name to channel.
    """

    n: int
    mode: str
    channels: object
    name: str = "custom"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ContractError(f"unknown noise mode {self.mode!r}")
        d2 = 4 ** self.n
        if self.mode == "generator":
            chans = {k: np.asarray(v, dtype=complex) for k, v in dict(self.channels).items()}
            for k, v in chans.items():
                if k not in ("H", "S", "CNOT", "X", "Y", "Z"):
                    raise ContractError(f"unknown generator {k!r}")
                if v.shape != (d2, d2):
                    raise ContractError(f"generator channel {k} has shape {v.shape}")
                ch.check_cptp(v, f"generator channel {k}")
            object.__setattr__(self, "channels", chans)
            return
        arr = np.asarray(self.channels, dtype=complex)
        lead = {"gate_independent": 0, "gate_dependent": 1, "time_dependent": 2}[self.mode]
        if arr.ndim != lead + 2 or arr.shape[-2:] != (d2, d2):
            raise ContractError(f"{self.mode} channels have shape {arr.shape}")
        if lead and self.n > 2:
            raise CapacityError("indexed gate-dependent noise needs n <= 2; use generator mode")
        if lead and arr.shape[-3] != cl.clifford_group_order(self.n):
            raise ContractError("gate-dependent noise must list one channel per group element")
        flat = arr.reshape(-1, d2, d2)
        # checking unique channels only keeps large group tables cheap
        _, first = np.unique(flat.round(12).reshape(len(flat), -1), axis=0, return_index=True)
        for k in first:
            ch.check_cptp(flat[k], "noise channel")
        arr.setflags(write=False)
        object.__setattr__(self, "channels", arr)

    @property
    def d(self):
        return 2 ** self.n

    @property
    def time_independent(self):
        return self.mode != "time_dependent"

    @property
    def steps(self):
        return self.channels.shape[0] if self.mode == "time_dependent" else None

    def error_channel(self, i, j=1):
        """``Lambda_{i,j}`` for group index ``i`` (n <= 2)."""
        if self.mode == "gate_independent":
            return self.channels
        if self.mode == "gate_dependent":
            return self.channels[i]
        if self.mode == "time_dependent":
            if not 1 <= j <= self.steps:
                raise ContractError(f"time step {j} outside 1..{self.steps}")
            return self.channels[j - 1, i]
        return self.noisy_element(self._group().elements[i]) @ ch.adjoint(
            self._group().superops[i])

    def per_gate(self, j=1):
        """All ``Lambda_{i,j}`` as a (G, d2, d2) array (n <= 2)."""
        group = self._group()
        if self.mode == "gate_independent":
            return np.broadcast_to(self.channels, (len(group),) + self.channels.shape)
        if self.mode == "gate_dependent":
            return self.channels
        if self.mode == "time_dependent":
            return self.channels[j - 1]
        return np.stack([self.error_channel(i) for i in range(len(group))])

    def average(self):
        """Average error operator over gates and, if time dependent, steps."""
        if self.mode == "gate_independent":
            return self.channels
        if self.mode == "time_dependent":
            return self.channels.mean(axis=(0, 1))
        return self.per_gate().mean(axis=0)

    def step_average(self, j):
        return self.per_gate(j).mean(axis=0)

    def noisy_element(self, g):
        """Superoperator of the noisy implementation of ``g`` (generator or global noise)."""
        ideal = cl.to_superoperator(g)
        if self.mode == "gate_independent":
            return self.channels @ ideal
        if self.mode != "generator":
            group = self._group()
            return self.error_channel(group.index(g)) @ ideal
        out = np.eye(4 ** self.n, dtype=complex)
        for gate in cl.decompose(g):
            gs = cl.to_superoperator(cl.gate_element(gate, self.n))
            lam = self.channels.get(gate.name)
            out = (gs if lam is None else lam @ gs) @ out
        return out

    def _group(self):
        if self.n > 2:
            raise CapacityError("group-indexed operations need n <= 2")
        return cl.clifford_group(self.n)


def identity_noise(n):
    return NoiseModel(n, "gate_independent", np.eye(4 ** n, dtype=complex), "identity")


def depolarizing_noise(p, n):
    return NoiseModel(n, "gate_independent", ch.depolarizing(p, 2 ** n), "depolarizing")


def amplitude_damping_noise(gamma, n):
    """Independent amplitude damping on every qubit after each gate."""
    one = ch.amplitude_damping(gamma)
    kraus1 = ch.super_to_kraus(one)
    kraus = kraus1
    for _ in range(n - 1):
        kraus = [np.kron(a, b) for a in kraus for b in kraus1]
    return NoiseModel(n, "gate_independent", ch.kraus_to_super(kraus), "amplitude_damping")


def inverse_gate_noise(n):
    """``Lambda_i = C_i^dag``: every noisy gate collapses to the identity."""
    group = cl.clifford_group(n)
    return NoiseModel(n, "gate_dependent", np.conj(np.swapaxes(group.superops, 1, 2)),
                      "inverse_gate_pathology")


def rotation_generator(u):
    """Unit-norm traceless Hermitian K with ``u ~ exp(-i a K)`` (principal log).

    Identity-like unitaries get the Z axis on qubit 0.
    """
    d = u.shape[0]
    t, z = sla.schur(np.asarray(u, dtype=complex), output="complex")
    phases = np.angle(np.diag(t))
    k = -(z * phases) @ z.conj().T
    k = (k + k.conj().T) / 2
    k -= np.trace(k).real / d * np.eye(d)
    norm = np.linalg.norm(k, 2)
    if norm < 1e-9:
        n = int(round(np.log2(d)))
        return cl.PauliOp.from_label("Z" + "I" * (n - 1)).to_matrix()
    return k / norm


def over_rotation_noise(n, angles, p=None):
    """Gate-dependent coherent over-rotation ``exp(-i theta_i K_i)`` about each gate's own axis.

    ``angles`` is a scalar or one angle per group element. With ``p`` the
    rotation is followed by depolarizing noise of that parameter.
    """
    group = cl.clifford_group(n)
    theta = np.broadcast_to(np.asarray(angles, dtype=float), (len(group),))
    dep = None if p is None else ch.depolarizing(p, 2 ** n)
    chans = []
    for g, th in zip(group.elements, theta):
        k = rotation_generator(cl.to_unitary(g))
        lam = ch.unitary_channel(sla.expm(-1j * th * k))
        chans.append(lam if dep is None else dep @ lam)
    return NoiseModel(n, "gate_dependent", np.stack(chans), "gate_dependent_unitary")


def random_gate_dependent_noise(n, strength, rng, base=None):
    """``Lambda_i = (1 - s) base + s R_i`` with independent random channels R_i."""
    group = cl.clifford_group(n)
    d = 2 ** n
    base = np.eye(d * d, dtype=complex) if base is None else base
    chans = np.stack([(1 - strength) * base + strength * ch.random_channel(d, rng)
                      for _ in range(len(group))])
    return NoiseModel(n, "gate_dependent", chans, "random")


# ---------------------------------------------------------------------------
# SPAM and configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpamSpec:
    rho: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        rho = ch.check_density(self.rho)
        e = ch.check_effect(self.E)
        if rho.shape != e.shape:
            raise ContractError("state and POVM element dimensions differ")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "E", e)

    @classmethod
    def perfect(cls, n):
        d = 2 ** n
        proj = np.zeros((d, d), dtype=complex)
        proj[0, 0] = 1
        return cls(proj, proj.copy())

    @property
    def d(self):
        return self.rho.shape[0]

    def expect(self, s):
        """``Tr[E S(rho)]`` for a superoperator."""
        return float(np.vdot(ch.vec(self.E), s @ ch.vec(self.rho)).real)


@dataclass(frozen=True, eq=False)
class RbConfig:
    n: int
    m_list: tuple
    K: int
    noise: NoiseModel
    spam: SpamSpec = None
    shots: int = 0
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = tuple(int(x) for x in self.m_list)
        if not m or any(x < 1 for x in m) or any(b <= a for a, b in zip(m, m[1:])):
            raise ContractError("m_list must be strictly increasing and >= 1")
        if self.K < 1 or self.shots < 0:
            raise ContractError("K must be >= 1 and shots >= 0")
        if self.noise.n != self.n:
            raise ContractError("noise model qubit count differs from config")
        if self.n > cl.DENSE_LIMIT:
            raise CapacityError(f"n={self.n} exceeds dense limit {cl.DENSE_LIMIT}")
        if self.noise.mode == "time_dependent" and self.noise.steps < m[-1] + 1:
            raise ContractError("time-dependent noise must cover steps 1..max(m)+1")
        object.__setattr__(self, "m_list", m)
        if self.spam is None:
            object.__setattr__(self, "spam", SpamSpec.perfect(self.n))


@dataclass(eq=False)
class RbDataset:
    """One record per (m, sequence); ``survival`` is successes/shots when shots > 0."""

    n: int
    m: np.ndarray
    seq: np.ndarray
    survival: np.ndarray
    successes: np.ndarray
    shots: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.int64)
        self.seq = np.asarray(self.seq, dtype=np.int64)
        self.survival = np.asarray(self.survival, dtype=float)
        self.successes = np.asarray(self.successes, dtype=np.int64)
        self.shots = np.asarray(self.shots, dtype=np.int64)
        if not (len(self.m) == len(self.seq) == len(self.survival)
                == len(self.successes) == len(self.shots)):
            raise ContractError("record columns differ in length")
        if len(self.survival) and (self.survival.min() < 0 or self.survival.max() > 1):
            raise ContractError("survival probabilities must lie in [0, 1]")

    @property
    def d(self):
        return 2 ** self.n

    def __len__(self):
        return len(self.m)

    def averages(self):
        """Distinct m, mean survival per m and record count K_m."""
        ms, inv, counts = np.unique(self.m, return_inverse=True, return_counts=True)
        means = np.bincount(inv, weights=self.survival) / counts
        return ms, means, counts

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("m,seq,survival,successes,shots\n")
            for row in zip(self.m, self.seq, self.survival, self.successes, self.shots):
                fh.write(f"{row[0]},{row[1]},{row[2]:.17g},{row[3]},{row[4]}\n")

    @classmethod
    def from_csv(cls, path, n, meta=None):
        raw = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
        raw = np.atleast_1d(raw)
        want = ("m", "seq", "survival", "successes", "shots")
        if raw.dtype.names is None or tuple(raw.dtype.names) != want:
            raise ContractError(f"CSV header must be {','.join(want)}")
        return cls(n, raw["m"], raw["seq"], raw["survival"], raw["successes"], raw["shots"],
                   dict(meta or {}))


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------


def generate_sequence(m, n, rng):
    """m uniform Cliffords followed by the inverse of their composition."""
    if m < 1:
        raise ContractError("m must be >= 1")
    gates = [cl.random_clifford(n, rng) for _ in range(m)]
    return gates + [cl.inverse(cl.compose_all(gates))]


def sequence_superoperator(seq, noise):
    """Noisy sequence ``Lambda_{i_{m+1},m+1} C_{i_{m+1}} ... Lambda_{i_1,1} C_{i_1}``."""
    n = seq[0].n
    if n > cl.DENSE_LIMIT:
        raise CapacityError(f"n={n} exceeds dense limit {cl.DENSE_LIMIT}")
    if noise.n != n:
        raise ContractError("noise model qubit count differs from sequence")
    out = np.eye(4 ** n, dtype=complex)
    if noise.mode in ("gate_dependent", "time_dependent"):
        group = cl.clifford_group(n)
        for j, g in enumerate(seq, start=1):
            i = group.index(g)
            out = noise.error_channel(i, j) @ group.superops[i] @ out
        return out
    for g in seq:
        out = noise.noisy_element(g) @ out
    return out


def _noisy_table(noise):
    group = cl.clifford_group(noise.n)
    if noise.mode == "gate_independent":
        return np.einsum("ij,gjk->gik", noise.channels, group.superops)
    return np.einsum("gij,gjk->gik", noise.per_gate(), group.superops)


def _inverse_indices(group, idx):
    """Group index of the inverse of each row's composed sequence."""
    if group.n == 1:
        acc = np.full(idx.shape[0], group.identity_index)
        for t in range(idx.shape[1]):
            acc = group.mult[idx[:, t], acc]
        return group.inverse_index[acc]
    out = np.empty(idx.shape[0], dtype=np.int64)
    for r, row in enumerate(idx):
        acc = cl.compose_all([group.elements[i] for i in row])
        out[r] = group.index(cl.inverse(acc))
    return out


def _survivals_table(cfg, m, table):
    """Survival for every sequence of length m (n <= 2, batched over sequences)."""
    group = cl.clifford_group(cfg.n)
    size = len(group)
    rngs = [np.random.default_rng([cfg.seed, m, s]) for s in range(cfg.K)]
    idx = np.stack([r.integers(0, size, size=m) for r in rngs])
    inv = _inverse_indices(group, idx)
    state = np.tile(ch.vec(cfg.spam.rho), (cfg.K, 1))
    timed = cfg.noise.mode == "time_dependent"
    full = np.concatenate([idx, inv[:, None]], axis=1)
    for t in range(m + 1):
        col = full[:, t]
        ops = (cfg.noise.channels[t, col] @ group.superops[col]) if timed else table[col]
        state = np.einsum("kij,kj->ki", ops, state)
    surv = np.clip((state @ ch.vec(cfg.spam.E).conj()).real, 0.0, 1.0)
    return surv, rngs


def _survivals_sampled(cfg, m):
    rngs = [np.random.default_rng([cfg.seed, m, s]) for s in range(cfg.K)]
    out = np.empty(cfg.K)
    for s, rng in enumerate(rngs):
        out[s] = np.clip(cfg.spam.expect(sequence_superoperator(
            generate_sequence(m, cfg.n, rng), cfg.noise)), 0.0, 1.0)
    return out, rngs


def run_experiment(cfg, threads=1):
    """Simulate every (m, sequence) record of ``cfg``.

    Each record draws from its own generator seeded by ``(seed, m, seq)``, so
    results do not depend on ``threads`` or evaluation order. For n <= 2 the
    Cliffords are drawn as uniform indices into the enumerated group; for
    n = 3 through :func:`rblab.clifford.random_clifford`.
    """
    table = _noisy_table(cfg.noise) if cfg.n <= 2 and cfg.noise.mode != "time_dependent" else None

    def one(m):
        if cfg.n <= 2:
            surv, rngs = _survivals_table(cfg, m, table)
        else:
            surv, rngs = _survivals_sampled(cfg, m)
        if cfg.shots:
            succ = np.array([r.binomial(cfg.shots, p) for r, p in zip(rngs, surv)])
            return succ / cfg.shots, succ
        return surv, np.zeros(cfg.K, dtype=np.int64)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, cfg.m_list))
    else:
        results = [one(m) for m in cfg.m_list]
    ms = np.repeat(cfg.m_list, cfg.K)
    seqs = np.tile(np.arange(cfg.K), len(cfg.m_list))
    surv = np.concatenate([r[0] for r in results])
    succ = np.concatenate([r[1] for r in results])
    shots = np.full(len(ms), cfg.shots)
    meta = dict(cfg.meta, n=cfg.n, m_list=list(cfg.m_list), K=cfg.K, shots=cfg.shots,
                seed=cfg.seed, noise=cfg.noise.name, mode=cfg.noise.mode)
    return RbDataset(cfg.n, ms, seqs, surv, succ, shots, meta)


# ---------------------------------------------------------------------------
# exact averages
# ---------------------------------------------------------------------------


def exact_average_curve(m_values, noise, spam=None):
    """Exact uniform average of the sequence fidelity for each m in ``m_values``.

    n = 1 uses a transfer recursion over (accumulated element, conditional
    average): ``v_t[g]`` is the average noisy product of length-t words whose
    ideal composition is g, applied to rho. One step costs |G|^2 small
    products, so m in the thousands is cheap. n = 2 is supported only for
    gate-independent noise, through ``Lambda o W(Lambda)^m``.
    """
    spam = SpamSpec.perfect(noise.n) if spam is None else spam
    m_values = [int(m) for m in np.atleast_1d(m_values)]
    if any(m < 1 for m in m_values):
        raise ContractError("m must be >= 1")
    if noise.mode == "time_dependent":
        raise UnsupportedModeError("exact average needs time-independent noise; use run_experiment")
    if noise.n == 1:
        return _transfer_curve(m_values, noise, spam)
    if noise.mode == "gate_independent" and noise.n <= 2:
        lam = noise.channels
        p = ch.depolarizing_parameter(lam)
        d = noise.d
        return np.array([spam.expect(lam @ ch.depolarizing(p ** m, d)) for m in m_values])
    raise CapacityError("exact average for gate-dependent noise is limited to n = 1")


def exact_average_fidelity(m, noise, spam=None):
    return float(exact_average_curve([m], noise, spam)[0])


def _transfer_curve(m_values, noise, spam):
    group = cl.clifford_group(1)
    size = len(group)
    a = _noisy_table(noise)
    # v_{t+1}[g'] = (1/G) sum_c A_c v_t[c^-1 g']
    pred = group.mult[group.inverse_index[:, None], np.arange(size)[None, :]]
    a_inv = a[group.inverse_index]
    e = ch.vec(spam.E).conj()
    v = np.zeros((size, 4), dtype=complex)
    v[group.identity_index] = ch.vec(spam.rho)
    want = sorted(set(m_values))
    found = {}
    for t in range(1, want[-1] + 1):
        v = np.einsum("cij,cgj->gi", a, v[pred]) / size
        if t in want:
            final = np.einsum("gij,gj->i", a_inv, v)
            found[t] = float((e @ final).real)
    return np.array([found[m] for m in m_values])


# ---------------------------------------------------------------------------
# perturbative model
# ---------------------------------------------------------------------------


class ModelCoefficients(NamedTuple):
    A0: float
    B0: float
    A1: float
    B1: float
    C1: float
    q: float
    p: float
    q_steps: tuple = ()

    def zeroth(self, m):
        return self.A0 * np.power(self.p, m) + self.B0

    def first(self, m):
        m = np.asarray(m, dtype=float)
        return (self.A1 * np.power(self.p, m) + self.B1
                + self.C1 * _corr_term(m, self.p) * (self.q - self.p ** 2))


def _corr_term(m, p):
    """``(m-1) p^(m-2)`` with the m = 1 term exactly 0 (also for p = 0)."""
    m = np.asarray(m, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (m - 1) * np.power(p, m - 2)
    return np.where(m == 1, 0.0, out)


def model_coefficients(noise, spam=None, m=None):
    """Zeroth- and first-order coefficients from exact group averages (n <= 2).

    The zeroth-order coefficients and ``p`` use the grand-average error
    operator (over gates and steps). ``Q_j`` and ``R_{m+1}`` use the per-step
    channels. Time-dependent noise requires ``m``; ``q`` is then the mean of
    ``q_2..q_m`` and ``q_steps`` lists them.
    """
    spam = SpamSpec.perfect(noise.n) if spam is None else spam
    if noise.n > 2:
        raise CapacityError("exact coefficients need the enumerated group (n <= 2)")
    group = cl.clifford_group(noise.n)
    d = noise.d
    sc = group.superops
    scd = np.conj(np.swapaxes(sc, 1, 2))
    if noise.mode == "time_dependent":
        if m is None:
            raise UnsupportedModeError("time-dependent coefficients need an explicit m")
        if noise.steps < m + 1:
            raise ContractError("noise does not cover step m + 1")
        lam = noise.channels[:m + 1].mean(axis=(0, 1))
        steps = list(range(2, m + 1))
        first_step, last_step = 1, m + 1
    else:
        lam = noise.average()
        steps = []
        first_step = last_step = 1
    p = ch.depolarizing_parameter(lam)
    eye = np.eye(d) / d
    rho = spam.rho

    def tr_e(s, x):
        return float(np.vdot(ch.vec(spam.E), s @ ch.vec(x)).real)

    def q_op(j):
        return (scd @ noise.per_gate(j) @ sc).mean(axis=0)

    def q_param(j):
        return ch.depolarizing_parameter(q_op(j) @ lam)

    a0 = tr_e(lam, rho - eye)
    b0 = tr_e(lam, eye)
    q1 = q_op(first_step)
    r = (noise.per_gate(last_step) @ sc @ lam @ scd).mean(axis=0)
    if steps:
        q_steps = tuple(q_param(j) for j in steps)
        q = float(np.mean(q_steps))
    else:
        q_steps = ()
        q = ch.depolarizing_parameter(q1 @ lam)
    if p == 0:
        a1 = float("nan")
    else:
        a1 = (tr_e(lam, ch.unvec(q1 @ ch.vec(rho), d) / p - rho + (p - 1) * eye / p)
              + tr_e(r, rho / p - eye / p))
    b1 = tr_e(r, eye)
    return ModelCoefficients(a0, b0, a1, b1, a0, q, p, q_steps)


def gamma(noise, rng=None, restarts=64):
    """Per-step ``gamma_j`` (one entry when the noise is time independent).

    ``gamma_j`` averages the 1->1 Hermitian norm of ``Lambda_{i,j} - Lambda``
    over the group, ``Lambda`` being the grand-average error operator.
    """
    if noise.n > 2:
        raise CapacityError("gamma needs the enumerated group (n <= 2)")
    lam = noise.average()
    if noise.mode == "gate_independent":
        return [0.0]
    steps = range(1, noise.steps + 1) if noise.mode == "time_dependent" else [1]
    out = []
    for j in steps:
        diffs = noise.per_gate(j) - lam
        flat = diffs.reshape(len(diffs), -1)
        uniq, inv = np.unique(flat.round(13), axis=0, return_inverse=True)
        first = np.array([np.flatnonzero(inv.ravel() == u)[0] for u in range(len(uniq))])
        norms = np.array([
            metrics.one_one_H_norm(diffs[k], rng=rng, restarts=restarts) for k in first])
        out.append(float(norms[inv.ravel()].mean()))
    return out


def _elementary_symmetric(values, k):
    e = np.zeros(k + 1)
    e[0] = 1.0
    for v in values:
        e[1:] = e[1:] + v * e[:-1]
    return float(e[k])


def perturbation_bound(k, gammas, m):
    """Bound on the order-k perturbation term.

    One gamma (time independent): ``C(m+1, k) gamma^k``. Otherwise the
    elementary symmetric polynomial of order k in ``gamma_1..gamma_{m+1}``.
    """
    gammas = list(gammas)
    if k < 0 or m < 1:
        raise ContractError("need k >= 0 and m >= 1")
    if len(gammas) == 1:
        return math.comb(m + 1, k) * gammas[0] ** k
    if len(gammas) < m + 1:
        raise ContractError("time-dependent bound needs gamma_1..gamma_{m+1}")
    return _elementary_symmetric(gammas[:m + 1], k)


def hoeffding_k(eps, delta, a=0.0, b=1.0):
    """Sequences needed so that ``P(|S_k - F| >= eps) <= delta`` for outcomes in [a, b].

    ``delta >= 1`` needs no samples and returns 0 with a warning.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    if not delta > 0:
        raise DomainError("delta must be positive")
    if not 0 <= a <= b <= 1:
        raise DomainError("need 0 <= a <= b <= 1")
    if delta >= 1:
        warnings.warn("delta >= 1 is satisfied without sampling; k = 0", stacklevel=2)
        return 0
    return int(math.ceil(math.log(2 / delta) * (b - a) ** 2 / (2 * eps ** 2)))


# ---------------------------------------------------------------------------
# pathology detection
# ---------------------------------------------------------------------------


class ProbeReport(NamedTuple):
    probabilities: tuple
    threshold: float
    pathological: bool


def pathology_probe(noise, n=None, spam=None, threshold=0.5):
    """Apply single noisy Cliffords that send |0..0> to an orthogonal basis state.

    Reports the probability of still observing |0..0> after each; the noise
    is flagged when a majority of probes exceed ``threshold``.
    """
    n = noise.n if n is None else n
    if n > 2:
        raise CapacityError("pathology probe needs n <= 2")
    spam = SpamSpec.perfect(n) if spam is None else spam
    group = cl.clifford_group(n)
    d = 2 ** n
    zero = np.zeros((d, d), dtype=complex)
    zero[0, 0] = 1
    v0 = ch.vec(zero)
    probs = []
    for i, s in enumerate(group.superops):
        out = ch.unvec(s @ v0, d).diagonal().real
        k = int(np.argmax(out))
        if k != 0 and out[k] > 1 - 1e-9:
            probs.append(spam.expect(noise.error_channel(i, 1) @ s))
    probs = tuple(float(p) for p in probs)
    flagged = sum(p > threshold for p in probs) > len(probs) / 2
    return ProbeReport(probs, threshold, bool(flagged))


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def noise_from_config(spec, n):
    kind = spec.get("type")
    if kind == "identity":
        return identity_noise(n)
    if kind == "depolarizing":
        return depolarizing_noise(float(spec["p"]), n)
    if kind == "amplitude_damping":
        return amplitude_damping_noise(float(spec["gamma"]), n)
    if kind == "gate_dependent_unitary":
        return over_rotation_noise(n, spec["angles"], spec.get("p"))
    if kind == "inverse_gate_pathology":
        return inverse_gate_noise(n)
    if kind == "custom":
        if n > 2:
            raise CapacityError("custom per-Clifford noise needs n <= 2; use generator noise")
        d2 = 4 ** n
        size = cl.clifford_group_order(n)
        default = spec.get("default")
        base = np.eye(d2, dtype=complex) if default is None else ch.channel_from_json(default)
        chans = np.tile(base, (size, 1, 1))
        for key, chan in spec.get("channels", {}).items():
            i = int(key)
            if not 0 <= i < size:
                raise ContractError(f"custom channel index {i} out of range")
            chans[i] = ch.channel_from_json(chan)
        return NoiseModel(n, "gate_dependent", chans, "custom")
    if kind == "generator":
        return NoiseModel(n, "generator", {k: ch.channel_from_json(v)
                                           for k, v in spec["channels"].items()}, "generator")
    raise ContractError(f"unknown noise type {kind!r}")


def spam_from_config(spec, n):
    if not spec or spec.get("type") == "perfect":
        return SpamSpec.perfect(n)
    try:
        rho = ch._complex_array(spec["rho"])
        e = ch._complex_array(spec["E"])
    except KeyError as exc:
        raise ContractError(f"spam needs {exc}") from None
    return SpamSpec(rho, e)


def config_from_dict(obj):
    """Build an :class:`RbConfig` from the JSON config schema."""
    try:
        n = int(obj["n"])
        noise = noise_from_config(obj["noise"], n)
        return RbConfig(n=n, m_list=tuple(obj["m_list"]), K=int(obj["K"]), noise=noise,
                        spam=spam_from_config(obj.get("spam"), n),
                        shots=int(obj.get("shots", 0)), seed=int(obj.get("seed", 0)))
    except (KeyError, TypeError) as exc:
        raise ContractError(f"malformed config: {exc!r}") from None
