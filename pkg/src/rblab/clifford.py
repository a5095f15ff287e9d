"""Symplectic representation of the n-qubit Clifford group.

Conventions
-----------
* A Pauli vector ``v`` of length ``2n`` is ``(x_0..x_{n-1}, z_0..z_{n-1})``.
  Its Hermitian Pauli operator is ``P(v) = i^(x.z) X^x Z^z``.
* A :class:`CliffordElement` ``(C, h)`` acts by conjugation
  ``U P(e_k) U^dag = (-1)^h[k] P(C[:, k])``. Columns ``0..n-1`` of ``C`` are
  the images of ``X_0..X_{n-1}``, columns ``n..2n-1`` the images of
  ``Z_0..Z_{n-1}``.
* Composition ``compose(a, b)`` means "apply ``b``, then ``a``", i.e. the
  unitary ``U_a U_b``.
* Dense matrices put qubit 0 in the most significant tensor factor.
* The Pauli basis is ordered I, X, Y, Z per qubit, lexicographically with
  qubit 0 most significant.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import CapacityError, ContractError

DENSE_LIMIT = 3

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)

# basis digit -> (x, z); I, X, Y, Z
_DIGIT_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))
_XZ_DIGIT = {xz: k for k, xz in enumerate(_DIGIT_XZ)}


def _bits(a, shape=None):
    arr = np.asarray(a, dtype=np.uint8) & 1
    if shape is not None and arr.shape != shape:
        raise ContractError(f"expected shape {shape}, got {arr.shape}")
    return arr


def symplectic_form(n):
    """The 2n x 2n form [[0, I], [I, 0]] over GF(2)."""
    nn = 2 * n
    om = np.zeros((nn, nn), dtype=np.uint8)
    om[:n, n:] = np.eye(n, dtype=np.uint8)
    om[n:, :n] = np.eye(n, dtype=np.uint8)
    return om


def gf2_matmul(a, b):
    return _kernels.active.matmul(np.ascontiguousarray(a, dtype=np.uint8),
                                  np.ascontiguousarray(b, dtype=np.uint8))


def is_symplectic(c, n):
    """Return True iff ``C^T Omega C = Omega`` modulo 2.

    Raises
    ------
    ContractError
        If ``c`` is not 2n x 2n.
    """
    c = np.asarray(c)
    if c.shape != (2 * n, 2 * n):
        raise ContractError(f"expected a {2 * n}x{2 * n} matrix, got shape {c.shape}")
    c = _bits(c)
    om = symplectic_form(n)
    return bool(np.array_equal(gf2_matmul(gf2_matmul(c.T.copy(), om), c), om))


# ---------------------------------------------------------------------------
# Pauli operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PauliOp:
    """The operator ``i^phase X^x Z^z`` on ``n`` qubits (phase mod 4)."""

    n: int
    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x", _bits(self.x, (self.n,)))
        object.__setattr__(self, "z", _bits(self.z, (self.n,)))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def from_label(cls, label):
        """Parse labels such as ``"XIZ"`` or ``"-iY"`` (Hermitian letters)."""
        phase = 0
        if label.startswith("-"):
            phase += 2
            label = label[1:]
        elif label.startswith("+"):
            label = label[1:]
        if label.startswith("i"):
            phase += 1
            label = label[1:]
        n = len(label)
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for q, ch in enumerate(label):
            if ch not in "IXYZ":
                raise ContractError(f"bad Pauli letter {ch!r}")
            x[q], z[q] = _DIGIT_XZ["IXYZ".index(ch)]
        # Y = i X Z, so each Y contributes one factor of i
        return cls(n, x, z, phase + int(np.sum(x & z)))

    @property
    def vector(self):
        return np.concatenate([self.x, self.z])

    @property
    def weight_xz(self):
        return int(np.sum(self.x & self.z))

    def is_hermitian(self):
        return (self.phase - self.weight_xz) % 2 == 0

    def hermitian_sign(self):
        """For Hermitian ops, return s with ``self = (-1)^s P(vector)``."""
        if not self.is_hermitian():
            raise ContractError("operator is not Hermitian")
        return ((self.phase - self.weight_xz) % 4) // 2

    def __mul__(self, other):
        if self.n != other.n:
            raise ContractError("qubit count mismatch")
        cross = int(np.sum(self.z & other.x))
        return PauliOp(self.n, self.x ^ other.x, self.z ^ other.z,
                       self.phase + other.phase + 2 * cross)

    def __eq__(self, other):
        return (isinstance(other, PauliOp) and self.n == other.n
                and self.phase == other.phase
                and np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z))

    def __hash__(self):
        return hash((self.n, self.phase, self.x.tobytes(), self.z.tobytes()))

    def commutes_with(self, other):
        return (int(np.sum(self.x & other.z)) + int(np.sum(self.z & other.x))) % 2 == 0

    def to_matrix(self):
        mat = np.array([[1.0 + 0j]])
        for q in range(self.n):
            local = _I2
            if self.x[q]:
                local = _X
            if self.z[q]:
                local = local @ _Z
            mat = np.kron(mat, local)
        return (1j ** self.phase) * mat

    def __repr__(self):
        herm = self.is_hermitian()
        letters = "".join("IXYZ"[_XZ_DIGIT[(int(a), int(b))]] for a, b in zip(self.x, self.z))
        if herm:
            sign = "-" if self.hermitian_sign() else "+"
            return f"PauliOp({sign}{letters})"
        return f"PauliOp(i^{self.phase} X^x Z^z, x={self.x.tolist()}, z={self.z.tolist()})"


def pauli_basis_vectors(n):
    """Pauli vectors for the 4^n basis elements, one per column."""
    count = 4 ** n
    digits = np.zeros((count, n), dtype=np.int64)
    idx = np.arange(count)
    for q in range(n - 1, -1, -1):
        digits[:, q] = idx % 4
        idx //= 4
    table = np.array(_DIGIT_XZ, dtype=np.uint8)
    xz = table[digits]  # (count, n, 2)
    return np.concatenate([xz[:, :, 0], xz[:, :, 1]], axis=1).T.copy()


def pauli_vector_index(vecs, n):
    """Basis index of each Pauli vector column (inverse of pauli_basis_vectors)."""
    vecs = np.asarray(vecs, dtype=np.int64)
    digit = np.array([[0, 3], [1, 2]])  # [x][z]
    idx = np.zeros(vecs.shape[1], dtype=np.int64)
    for q in range(n):
        idx = idx * 4 + digit[vecs[q], vecs[n + q]]
    return idx


@functools.lru_cache(maxsize=8)
def pauli_basis(n):
    """Hermitian Pauli matrices, shape (4^n, d, d), in basis order."""
    vecs = pauli_basis_vectors(n)
    return np.stack([PauliOp(n, v[:n], v[n:], int(np.sum(v[:n] & v[n:]))).to_matrix()
                     for v in vecs.T])


@functools.lru_cache(maxsize=8)
def pauli_to_super_transform(n):
    """Unitary T with columns vec(P_a)/sqrt(d) (column stacking)."""
    d = 2 ** n
    basis = pauli_basis(n)
    t = np.stack([p.reshape(-1, order="F") for p in basis], axis=1) / np.sqrt(d)
    t.setflags(write=False)
    return t


# ---------------------------------------------------------------------------
# Clifford elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CliffordElement:
    """Clifford unitary modulo global phase, as a symplectic matrix and sign bits."""

    C: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        c = _bits(self.C)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2:
            raise ContractError(f"C must be 2n x 2n, got {c.shape}")
        h = _bits(self.h, (c.shape[0],))
        c.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "h", h)

    @property
    def n(self):
        return self.C.shape[0] // 2

    def key(self):
        return np.packbits(np.concatenate([self.C.ravel(), self.h])).tobytes()

    def is_valid(self):
        return is_symplectic(self.C, self.n)

    def __eq__(self, other):
        return (isinstance(other, CliffordElement) and self.C.shape == other.C.shape
                and np.array_equal(self.C, other.C) and np.array_equal(self.h, other.h))

    def __hash__(self):
        return hash(self.key())

    def __matmul__(self, other):
        return compose(self, other)

    def __repr__(self):
        return f"CliffordElement(n={self.n}, C={self.C.tolist()}, h={self.h.tolist()})"


def identity(n):
    return CliffordElement(np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))


def _signs(g, vecs):
    """Sign bits s with g P(v) g^dag = (-1)^s P(C v), one per column of vecs."""
    return _kernels.active.conjugation_signs(
        np.ascontiguousarray(g.C), np.ascontiguousarray(g.h),
        np.ascontiguousarray(vecs, dtype=np.uint8))


def compose(a, b):
    """Return the element applying ``b`` first and then ``a``."""
    if a.n != b.n:
        raise ContractError(f"qubit count mismatch: {a.n} vs {b.n}")
    c = gf2_matmul(a.C, b.C)
    h = b.h ^ _signs(a, b.C)
    return CliffordElement(c, h)


def compose_all(elements):
    """Compose a time-ordered list (first element applied first)."""
    it = iter(elements)
    acc = next(it)
    for g in it:
        acc = compose(g, acc)
    return acc


def inverse(g):
    """Inverse element, so that ``compose(inverse(g), g)`` is the identity."""
    om = symplectic_form(g.n)
    c_inv = gf2_matmul(gf2_matmul(om, g.C.T.copy()), om)
    # g P(w) g^dag = (-1)^s P(e_k) for w = C^-1 e_k, hence g^dag P(e_k) g = (-1)^s P(w)
    return CliffordElement(c_inv, _signs(g, c_inv))


def conjugate_pauli(g, p):
    """Return ``U P U^dag`` with exact phase."""
    if g.n != p.n:
        raise ContractError(f"qubit count mismatch: {g.n} vs {p.n}")
    v = p.vector
    s = int(_signs(g, v[:, None])[0])
    r = gf2_matmul(g.C, v[:, None])[:, 0]
    n = g.n
    rw = int(np.sum(r[:n] & r[n:]))
    return PauliOp(n, r[:n], r[n:], p.phase - p.weight_xz + 2 * s + rw)


def pauli_element(x, z):
    """The Clifford element of conjugation by the Pauli ``X^x Z^z``."""
    x = _bits(x)
    z = _bits(z)
    n = x.shape[0]
    # X_j flips sign iff a Z acts on j; Z_j flips sign iff an X acts on j
    return CliffordElement(np.eye(2 * n, dtype=np.uint8), np.concatenate([z, x]))


def random_clifford(n, rng):
    """Uniformly random Clifford element.

    The symplectic matrix is built column by column: X images first, then Z
    images, each column a uniformly random solution of the GF(2) system fixing
    its symplectic products with the columns already chosen (X images are
    redrawn while they fall in the span of earlier X images). The sign bits
    are independent fair coins. Cost is O(n^4).
    """
    if n < 1:
        raise ContractError("n must be >= 1")
    budget = _kernels.bit_budget(n)
    while True:
        bits = rng.integers(0, 2, size=budget, dtype=np.uint8)
        c, ok = _kernels.active.sample_symplectic(n, bits)
        if ok:
            break
    h = rng.integers(0, 2, size=2 * n, dtype=np.uint8)
    return CliffordElement(c, h)


def random_symplectic_batch(n, count, rng):
    """``count`` uniform symplectic matrices as a (count, 2n, 2n) array."""
    budget = _kernels.bit_budget(n)
    bits = rng.integers(0, 2, size=(count, budget), dtype=np.uint8)
    out, ok = _kernels.active.sample_symplectic_batch(n, bits)
    bad = np.flatnonzero(ok == 0)
    while bad.size:
        bits = rng.integers(0, 2, size=(bad.size, budget), dtype=np.uint8)
        redo, ok2 = _kernels.active.sample_symplectic_batch(n, bits)
        out[bad] = redo
        bad = bad[ok2 == 0]
    return out


def random_cliffords(n, count, rng):
    mats = random_symplectic_batch(n, count, rng)
    hs = rng.integers(0, 2, size=(count, 2 * n), dtype=np.uint8)
    return [CliffordElement(c, h) for c, h in zip(mats, hs)]


# ---------------------------------------------------------------------------
# generators and decomposition
# ---------------------------------------------------------------------------


class Gate(NamedTuple):
    name: str
    qubits: tuple

    def __str__(self):
        return " ".join([self.name, *map(str, self.qubits)])

    @classmethod
    def parse(cls, text):
        parts = text.split()
        if not parts or parts[0] not in ("H", "S", "CNOT", "X", "Y", "Z"):
            raise ContractError(f"unknown gate {text!r}")
        return cls(parts[0], tuple(int(q) for q in parts[1:]))


def _check_qubits(gate, n):
    want = 2 if gate.name == "CNOT" else 1
    if len(gate.qubits) != want or any(not 0 <= q < n for q in gate.qubits):
        raise ContractError(f"bad qubits for {gate} on {n} qubits")
    if gate.name == "CNOT" and gate.qubits[0] == gate.qubits[1]:
        raise ContractError("CNOT control equals target")


def gate_element(gate, n):
    """CliffordElement of a single generator or Pauli gate."""
    _check_qubits(gate, n)
    c = np.eye(2 * n, dtype=np.uint8)
    h = np.zeros(2 * n, dtype=np.uint8)
    q = gate.qubits[0]
    if gate.name == "H":
        c[q, q] = c[n + q, n + q] = 0
        c[n + q, q] = c[q, n + q] = 1
    elif gate.name == "S":
        c[n + q, q] = 1  # X -> Y
    elif gate.name == "CNOT":
        t = gate.qubits[1]
        c[t, q] = 1  # X_c -> X_c X_t
        c[n + q, n + t] = 1  # Z_t -> Z_c Z_t
    else:
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        x[q] = gate.name in "XY"
        z[q] = gate.name in "YZ"
        return pauli_element(x, z)
    return CliffordElement(c, h)


def _embed(local, qubit, n):
    mat = np.array([[1.0 + 0j]])
    for q in range(n):
        mat = np.kron(mat, local if q == qubit else _I2)
    return mat


def gate_unitary(gate, n):
    """Dense unitary of a gate."""
    _check_qubits(gate, n)
    if gate.name == "CNOT":
        c, t = gate.qubits
        p0 = _embed(np.diag([1, 0]).astype(complex), c, n)
        p1 = _embed(np.diag([0, 1]).astype(complex), c, n)
        return p0 + p1 @ _embed(_X, t, n)
    local = {"H": _H, "S": _S, "X": _X, "Y": _Y, "Z": _Z}[gate.name]
    return _embed(local, gate.qubits[0], n)


def sequence_element(gates, n):
    """Compose a time-ordered gate list into one element."""
    acc = identity(n)
    for gate in gates:
        acc = compose(gate_element(gate, n), acc)
    return acc


def _reduce_symplectic(c, n):
    """Gates G_1..G_k (time order) with S_Gk ... S_G1 c = I."""
    m = c.copy()
    gates = []

    def h_(q):
        m[[q, n + q]] = m[[n + q, q]]
        gates.append(Gate("H", (q,)))

    def s_(q):
        m[n + q] ^= m[q]
        gates.append(Gate("S", (q,)))

    def cx(a, b):
        m[b] ^= m[a]
        m[n + a] ^= m[n + b]
        gates.append(Gate("CNOT", (a, b)))

    for i in range(n):
        col = i
        # X-image: make the X part nonzero, gather it onto qubit i, clear Z part
        for j in range(i, n):
            if not m[j, col] and m[n + j, col]:
                h_(j)
        if not m[i, col]:
            j = i + int(np.flatnonzero(m[i:n, col])[0])
            cx(j, i)
        for j in range(i + 1, n):
            if m[j, col]:
                cx(i, j)
        others = [j for j in range(i + 1, n) if m[n + j, col]]
        if others:
            if not m[n + i, col]:
                s_(i)
            for j in others:
                cx(j, i)
        if m[n + i, col]:
            s_(i)
        # Z-image, reduced to X_i under H(i) using gates that fix Z_i
        col = n + i
        h_(i)
        for j in range(i + 1, n):
            if m[j, col]:
                cx(i, j)
        for j in range(i + 1, n):
            if m[n + j, col]:
                h_(j)
                cx(i, j)
                h_(j)
        if m[n + i, col]:
            s_(i)
        h_(i)
    if not np.array_equal(m, np.eye(2 * n, dtype=np.uint8)):
        raise ContractError("matrix is not symplectic")
    return gates


def decompose(g):
    """Decompose ``g`` into a leading Pauli layer followed by H, S, CNOT gates.

    The symplectic part is synthesized by Gaussian elimination on the inverse
    element; the sign bits are then fixed by a single layer of X, Y, Z gates
    applied first. At most ``5 n^2 + 3 n`` gates are emitted (Pauli layer
    included); see ``max_decomposition_length``.
    """
    n = g.n
    gates = _reduce_symplectic(inverse(g).C, n)
    rest = sequence_element(gates, n)
    fix = compose(inverse(rest), g)
    if not np.array_equal(fix.C, np.eye(2 * n, dtype=np.uint8)):
        raise ContractError("decomposition failed to reproduce the symplectic part")
    layer = []
    for q in range(n):
        zq, xq = fix.h[q], fix.h[n + q]
        if xq and zq:
            layer.append(Gate("Y", (q,)))
        elif xq:
            layer.append(Gate("X", (q,)))
        elif zq:
            layer.append(Gate("Z", (q,)))
    return layer + gates


def max_decomposition_length(n):
    return 5 * n * n + 3 * n


def to_unitary(g, max_n=DENSE_LIMIT):
    """Dense unitary (up to global phase) assembled from ``decompose(g)``."""
    if g.n > max_n:
        raise CapacityError(f"n={g.n} exceeds dense limit {max_n}")
    u = np.eye(2 ** g.n, dtype=complex)
    for gate in decompose(g):
        u = gate_unitary(gate, g.n) @ u
    return u


def from_unitary(u, atol=1e-8):
    """Read off ``(C, h)`` of a dense Clifford unitary from its Pauli action."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    n = int(round(np.log2(d)))
    if 2 ** n != d or u.shape != (d, d):
        raise ContractError("unitary must be 2^n x 2^n")
    basis = pauli_basis(n)
    vecs = pauli_basis_vectors(n)
    c = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    h = np.zeros(2 * n, dtype=np.uint8)
    for k in range(2 * n):
        e = np.zeros(2 * n, dtype=np.uint8)
        e[k] = 1
        gen = basis[pauli_vector_index(e[:, None], n)[0]]
        img = u @ gen @ u.conj().T
        coeffs = np.einsum("aji,ji->a", basis.conj(), img) / d
        a = int(np.argmax(np.abs(coeffs)))
        if abs(abs(coeffs[a]) - 1) > atol or abs(coeffs[a].imag) > atol:
            raise ContractError("unitary is not Clifford")
        c[:, k] = vecs[:, a]
        h[k] = coeffs[a].real < 0
    return CliffordElement(c, h)


# ---------------------------------------------------------------------------
# dense realization
# ---------------------------------------------------------------------------


def pauli_transfer_matrix(g, max_n=DENSE_LIMIT):
    """Real orthogonal matrix R[a, b] = tr(P_a U P_b U^dag) / d (signed permutation)."""
    n = g.n
    if n > max_n:
        raise CapacityError(f"n={n} exceeds dense limit {max_n}")
    vecs = pauli_basis_vectors(n)
    signs = _signs(g, vecs)
    images = gf2_matmul(g.C, vecs)
    rows = pauli_vector_index(images, n)
    dd = 4 ** n
    r = np.zeros((dd, dd))
    r[rows, np.arange(dd)] = 1.0 - 2.0 * signs
    return r


def to_superoperator(g, max_n=DENSE_LIMIT):
    """Column-stacking superoperator of ``rho -> U rho U^dag``.

    Raises
    ------
    CapacityError
        If ``g.n`` exceeds ``max_n``.
    """
    r = pauli_transfer_matrix(g, max_n)
    t = pauli_to_super_transform(g.n)
    return t @ r @ t.conj().T


# ---------------------------------------------------------------------------
# enumeration (n <= 2)
# ---------------------------------------------------------------------------


def enumerate_symplectic(n):
    """All 2n x 2n symplectic matrices, by filtering every binary matrix."""
    if n > 2:
        raise CapacityError("enumeration is limited to n <= 2")
    nn = 2 * n
    total = 1 << (nn * nn)
    codes = np.arange(total, dtype=np.int64)
    shifts = np.arange(nn * nn - 1, -1, -1, dtype=np.int64)
    mats = ((codes[:, None] >> shifts) & 1).astype(np.int64).reshape(total, nn, nn)
    om = symplectic_form(n).astype(np.int64)
    gram = np.einsum("kij,jl,klm->kim", mats.transpose(0, 2, 1), om, mats) % 2
    keep = np.all(gram == om, axis=(1, 2))
    return mats[keep].astype(np.uint8)


def clifford_group_order(n):
    order = 2 ** (n * n + 2 * n)
    for j in range(1, n + 1):
        order *= 4 ** j - 1
    return order


class CliffordGroup:
    """Enumerated Clifford group for n <= 2 with cached dense data.

    Elements are indexed ``0..order-1``. ``superops``, ``inverse_index`` and,
    for n = 1, the multiplication table ``mult[a, b] = index(compose(a, b))``
    are computed on first use.
    """

    def __init__(self, n):
        if n > 2:
            raise CapacityError("enumeration is limited to n <= 2")
        self.n = n
        self.d = 2 ** n
        mats = enumerate_symplectic(n)
        hs = pauli_basis_vectors(n).T  # every 2n-bit vector, order irrelevant
        hs = hs[np.lexsort(hs.T[::-1])]
        self.elements = [CliffordElement(c, h) for c in mats for h in hs]
        self._index = {g.key(): i for i, g in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index(self, g):
        try:
            return self._index[g.key()]
        except KeyError:
            raise ContractError("element not in the enumerated group") from None

    @functools.cached_property
    def superops(self):
        out = np.stack([to_superoperator(g) for g in self.elements])
        out.setflags(write=False)
        return out

    @functools.cached_property
    def inverse_index(self):
        return np.array([self.index(inverse(g)) for g in self.elements])

    @functools.cached_property
    def identity_index(self):
        return self.index(identity(self.n))

    @functools.cached_property
    def mult(self):
        if self.n > 1:
            raise CapacityError("multiplication table is only built for n = 1")
        size = len(self)
        table = np.empty((size, size), dtype=np.int64)
        for a, ga in enumerate(self.elements):
            for b, gb in enumerate(self.elements):
                table[a, b] = self.index(compose(ga, gb))
        return table


@functools.lru_cache(maxsize=2)
def clifford_group(n):
    return CliffordGroup(n)


# ---------------------------------------------------------------------------
# single-qubit pulse table
# ---------------------------------------------------------------------------


def _rot(axis, angle):
    return np.cos(angle / 2) * _I2 - 1j * np.sin(angle / 2) * axis


PULSES = {
    "X": _rot(_X, np.pi),
    "Y": _rot(_Y, np.pi),
    "X/2": _rot(_X, np.pi / 2),
    "-X/2": _rot(_X, -np.pi / 2),
    "Y/2": _rot(_Y, np.pi / 2),
    "-Y/2": _rot(_Y, -np.pi / 2),
}


@functools.lru_cache(maxsize=1)
def single_qubit_pulse_table():
    """Minimal-length words over the pulses {X, Y, +-X/2, +-Y/2}.

    Found by breadth-first search from the identity. The identity is listed
    as a single idle pulse ``("I",)`` so every Clifford occupies at least one
    time slot. Returns a dict mapping element key to pulse tuple.
    """
    pulses = {name: from_unitary(u) for name, u in PULSES.items()}
    start = identity(1)
    table = {start.key(): ()}
    queue = deque([start])
    while queue:
        g = queue.popleft()
        word = table[g.key()]
        for name, p in pulses.items():
            nxt = compose(p, g)
            if nxt.key() not in table:
                table[nxt.key()] = word + (name,)
                queue.append(nxt)
    table[start.key()] = ("I",)
    return table


def average_pulse_count():
    table = single_qubit_pulse_table()
    return sum(len(w) for w in table.values()) / len(table)


# ---------------------------------------------------------------------------
# text serialization
# ---------------------------------------------------------------------------


def to_hex(g):
    """``"<C bits hex> <h bits hex>"`` with C flattened row-major."""
    return f"{np.packbits(g.C.ravel()).tobytes().hex()} {np.packbits(g.h).tobytes().hex()}"


def from_hex(text, n):
    parts = text.split()
    if len(parts) != 2:
        raise ContractError(f"expected '<C hex> <h hex>', got {text!r}")
    nn = 2 * n
    try:
        cbits = np.unpackbits(np.frombuffer(bytes.fromhex(parts[0]), dtype=np.uint8))
        hbits = np.unpackbits(np.frombuffer(bytes.fromhex(parts[1]), dtype=np.uint8))
    except ValueError as exc:
        raise ContractError(f"bad hex: {exc}") from None
    if cbits.size < nn * nn or hbits.size < nn:
        raise ContractError("hex payload too short for n")
    g = CliffordElement(cbits[:nn * nn].reshape(nn, nn), hbits[:nn])
    if not g.is_valid():
        raise ContractError("decoded matrix is not symplectic")
    return g
