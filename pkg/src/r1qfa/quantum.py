"""Completely positive maps, their idempotent limits, and quantum automata.

Matrices are vectorized by stacking columns, ``vec(M) = M.reshape(-1,
order="F")``.  Under this convention the Kraus family ``{V_i}`` of
``Phi(M) = sum_i V_i M V_i*`` has superoperator ``sum_i conj(V_i) kron V_i``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .automata import END, START, Mmqfa, StatePartition, check_symbol
from .band import Alphabet
from .errors import InputError, NumericalError, SemanticsError, ValidationError
from .probsim import HaltingDistribution, register_stepper

log = logging.getLogger(__name__)

TOL = 1e-10
PERIPHERAL_TOL = 1e-9
IDEMPOTENT_TOL = 1e-6


def _op(m):
    if sp.issparse(m):
        return sp.csr_matrix(m, dtype=complex)
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise InputError("Kraus operators must be 2-D matrices")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def _dense(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def _dag(m):
    return m.conj().T


class CpMap:
    """A completely positive map given by Kraus operators.

    Parameters
    ----------
    kraus : sequence of matrices
        Dense arrays or scipy sparse matrices, all of the same shape ``m x n``.
    """

    def __init__(self, kraus: Sequence):
        ops = [_op(k) for k in kraus]
        if not ops:
            raise InputError("a CP map needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise InputError("Kraus operators have inconsistent shapes")
        self.kraus = tuple(ops)
        self.shape = shape

    @property
    def dim(self) -> int:
        if self.shape[0] != self.shape[1]:
            raise InputError("map is not square")
        return self.shape[0]

    def __call__(self, M):
        M = np.asarray(M, dtype=complex)
        out = np.zeros((self.shape[0], self.shape[0]), dtype=complex)
        for V in self.kraus:
            out += np.asarray(V @ M @ _dag(V))
        return out

    apply = __call__

    def compose(self, other: "CpMap") -> "CpMap":
        """``self o other``: apply ``other`` first."""
        return CpMap([A @ B for A in self.kraus for B in other.kraus])

    def kraus_sum(self, adjoint_first: bool = True) -> np.ndarray:
        """``sum V* V`` (default) or ``sum V V*``."""
        acc = None
        for V in self.kraus:
            term = _dag(V) @ V if adjoint_first else V @ _dag(V)
            acc = term if acc is None else acc + term
        return _dense(acc)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in _dense(V)] for V in self.kraus],
        }

    @classmethod
    def from_dict(cls, data) -> "CpMap":
        if not isinstance(data, dict) or "kraus" not in data:
            raise InputError("channel must be an object with a 'kraus' list")
        try:
            ops = [np.array([[complex(re, im) for re, im in row] for row in K]) for K in data["kraus"]]
        except (TypeError, ValueError):
            raise InputError("Kraus entries must be [re, im] pairs") from None
        c = cls(ops)
        if "dim" in data and (c.shape[0] != c.shape[1] or c.shape[0] != data["dim"]):
            raise InputError(f"declared dim {data['dim']} does not match Kraus shape {c.shape}")
        return c


def is_hermitian(m, tol: float = TOL) -> bool:
    m = _dense(m)
    return m.shape[0] == m.shape[1] and np.abs(m - m.conj().T).max(initial=0.0) <= tol


def is_positive(m, tol: float = TOL) -> bool:
    """Hermitian with smallest eigenvalue at least ``-tol``."""
    m = _dense(np.asarray(m) if not sp.issparse(m) else m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError("positivity is defined for square matrices")
    if not is_hermitian(m, tol):
        return False
    if m.size == 0:
        return True
    h = (m + m.conj().T) / 2
    return bool(np.linalg.eigvalsh(h).min() >= -tol)


def _le_identity(S, tol):
    return is_positive(np.eye(S.shape[0]) - S, tol)


def _eq_identity(S, tol):
    return np.abs(S - np.eye(S.shape[0])).max(initial=0.0) <= tol


def channel_predicates(c: CpMap, tol: float = TOL) -> dict:
    """The six trace/unit flags of a CP map."""
    A = c.kraus_sum(adjoint_first=True)  # sum V* V: trace side
    flags = {
        "trace_preserving": bool(_eq_identity(A, tol)),
        "sub_tracial": bool(_le_identity(A, tol)),
    }
    if c.shape[0] == c.shape[1]:
        B = c.kraus_sum(adjoint_first=False)  # sum V V*: unit side
        flags["unital"] = bool(_eq_identity(B, tol))
        flags["sub_unital"] = bool(_le_identity(B, tol))
    else:
        flags["unital"] = flags["sub_unital"] = False
    flags["bistochastic"] = flags["trace_preserving"] and flags["unital"]
    flags["sub_bistochastic"] = flags["sub_tracial"] and flags["sub_unital"]
    return flags


def is_bistochastic(c: CpMap, tol: float = TOL) -> bool:
    return channel_predicates(c, tol)["bistochastic"]


def vec(M) -> np.ndarray:
    return np.asarray(M).reshape(-1, order="F")


def unvec(v, n: int) -> np.ndarray:
    return np.asarray(v).reshape((n, n), order="F")


def superoperator(c: CpMap) -> np.ndarray:
    """Matrix of ``vec(M) -> vec(Phi(M))`` (column stacking)."""
    n = c.dim
    S = np.zeros((n * n, n * n), dtype=complex)
    for V in c.kraus:
        V = _dense(V)
        S += np.kron(V.conj(), V)
    return S


def operator_norm(S) -> float:
    """Largest singular value; the Frobenius-induced norm of the map."""
    return float(np.linalg.norm(np.asarray(S), 2))


def _as_superop(x) -> np.ndarray:
    if isinstance(x, CpMap):
        return superoperator(x)
    S = np.asarray(x, dtype=complex)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or math.isqrt(S.shape[0]) ** 2 != S.shape[0]:
        raise InputError("superoperators are square with size n^2")
    return S


@dataclass(frozen=True)
class OmegaInfo:
    method: str  # "schur" or "cesaro"
    peripheral: np.ndarray
    idempotency_error: float
    confidence: str  # "full" or "reduced"


def _cesaro_fixed_part(S: np.ndarray, rounds: int = 40) -> np.ndarray:
    """Average of ``S^k`` for ``k < 2^rounds`` by repeated doubling."""
    C = np.eye(S.shape[0], dtype=complex)
    P = S.copy()
    for _ in range(rounds):
        C = 0.5 * (C + P @ C)
        P = P @ P
    return C


def omega_limit(c, peripheral_tol: float = PERIPHERAL_TOL, idempotent_tol: float = IDEMPOTENT_TOL,
                full_output: bool = False):
    """The idempotent limit point of the powers of a sub-bistochastic map.

    The superoperator is brought to sorted Schur form with the peripheral
    eigenvalues (``|lambda| >= 1 - peripheral_tol``) leading.  Solving a
    Sylvester equation separates the peripheral invariant subspace from the
    rest, and the resulting spectral projector is returned.  Powers of the map
    converge to it along a subsequence because the peripheral part is
    diagonalizable with unimodular eigenvalues.

    If the Sylvester step is ill-conditioned or the projector fails the
    idempotency check, Cesaro averages of the powers are used instead.  That
    fallback captures only the eigenvalue-1 part and is flagged with reduced
    confidence.

    Parameters
    ----------
    c : CpMap or ndarray
        Channel or its superoperator.
    full_output : bool
        Also return an :class:`OmegaInfo` record.

    Returns
    -------
    ndarray
        The ``n^2 x n^2`` superoperator of the limit.

    Raises
    ------
    NumericalError
        When neither route yields an idempotent within ``idempotent_tol``.
    """
    if isinstance(c, CpMap):
        flags = channel_predicates(c, max(TOL, 1e-9))
        if not flags["sub_bistochastic"]:
            raise InputError("omega_limit needs a sub-bistochastic map")
    S = _as_superop(c)
    N = S.shape[0]
    E = None
    method = "schur"
    periph = np.array([])
    try:
        T, Z, k = la.schur(S, output="complex", sort=lambda z: abs(z) >= 1 - peripheral_tol)
        periph = np.diag(T)[:k]
        if k == 0:
            E = np.zeros_like(S)
        elif k == N:
            E = np.eye(N, dtype=complex)
        else:
            T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
            Yv = la.solve_sylvester(T11, -T22, -T12)
            if not np.all(np.isfinite(Yv)) or np.abs(Yv).max() > 1e8:
                raise la.LinAlgError("ill-conditioned spectral separation")
            Pt = np.zeros((N, N), dtype=complex)
            Pt[:k, :k] = np.eye(k)
            Pt[:k, k:] = -Yv
            E = Z @ Pt @ Z.conj().T
    except (la.LinAlgError, ValueError) as exc:
        log.warning("Schur route failed (%s); using Cesaro averaging", exc)
        E = None
    err = np.inf if E is None else float(np.abs(E @ E - E).max(initial=0.0))
    if E is None or err > idempotent_tol:
        method = "cesaro"
        E = _cesaro_fixed_part(S)
        err = float(np.abs(E @ E - E).max(initial=0.0))
        if err > idempotent_tol:
            raise NumericalError(
                f"omega_limit: no idempotent within {idempotent_tol} "
                f"(error {err:.2e}, peripheral eigenvalues {np.round(periph, 12).tolist()})"
            )
    info = OmegaInfo(method, periph, err, "full" if method == "schur" else "reduced")
    return (E, info) if full_output else E


@dataclass(frozen=True)
class BistEJReport:
    limit: np.ndarray
    permutations_checked: int
    permutation_deviation: float
    absorption_deviation: float
    idempotency_error: float
    input_idempotency_error: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "permutations_checked": self.permutations_checked,
            "permutation_deviation": self.permutation_deviation,
            "absorption_deviation": self.absorption_deviation,
            "idempotency_error": self.idempotency_error,
            "input_idempotency_error": self.input_idempotency_error,
            "ok": self.ok,
        }


def _product(mats):
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return out


def verify_bist_ej(maps, n_perms: int = 12, rng=None, tol: float = IDEMPOTENT_TOL) -> BistEJReport:
    """Check that the idempotent limit of a product ignores the factor order.

    For idempotents ``e_1 .. e_k`` the limit ``E`` of ``e_1 o ... o e_k``
    is compared with the limits for permuted orders (all of them when
    ``k! <= n_perms``, otherwise ``n_perms`` random ones), and the absorption
    laws ``e_i o E = E o e_i = E`` are measured.  Deviations are Frobenius
    norms.
    """
    mats = [_as_superop(m) for m in maps]
    if not mats:
        raise InputError("need at least one map")
    in_err = max(float(np.linalg.norm(m @ m - m)) for m in mats)
    E = omega_limit(mats[0] if len(mats) == 1 else _product(mats))
    k = len(mats)
    if math.factorial(k) <= n_perms:
        perms = list(itertools.permutations(range(k)))
    else:
        rng = np.random.default_rng(rng)
        perms = [tuple(rng.permutation(k)) for _ in range(n_perms)]
    dev = 0.0
    for p in perms:
        Ep = omega_limit(_product([mats[i] for i in p]))
        dev = max(dev, float(np.linalg.norm(Ep - E)))
    absorb = 0.0
    for m in mats:
        absorb = max(absorb, float(np.linalg.norm(m @ E - E)), float(np.linalg.norm(E @ m - E)))
    idem = float(np.linalg.norm(E @ E - E))
    ok = dev <= tol and absorb <= tol and idem <= tol
    return BistEJReport(E, len(perms), dev, absorb, idem, in_err, ok)


# --------------------------------------------------------------------------
# random channels


def haar_unitary(n: int, rng=None) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    rng = np.random.default_rng(rng)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_measurement(n: int, rng=None, parts: int | None = None) -> CpMap:
    """Pinching ``M -> sum_j P_j M P_j`` onto a random orthogonal decomposition."""
    rng = np.random.default_rng(rng)
    U = haar_unitary(n, rng)
    parts = int(rng.integers(1, n + 1)) if parts is None else parts
    labels = np.concatenate([np.arange(parts), rng.integers(0, parts, n - parts)])
    rng.shuffle(labels)
    ops = []
    for j in range(parts):
        cols = U[:, labels == j]
        ops.append(cols @ cols.conj().T)
    return CpMap(ops)


def _block_sizes(n: int, blocks: int, rng) -> np.ndarray:
    sizes = np.ones(blocks, dtype=int)
    for _ in range(n - blocks):
        sizes[rng.integers(blocks)] += 1
    return sizes


def _block_unitary(W: np.ndarray, sizes, rng) -> np.ndarray:
    """``W D W*`` with ``D`` block diagonal and Haar on each block."""
    n = W.shape[0]
    D = np.zeros((n, n), dtype=complex)
    start = 0
    for s in sizes:
        D[start:start + s, start:start + s] = haar_unitary(int(s), rng)
        start += s
    return W @ D @ W.conj().T


def random_unitary_mixture(n: int, rng=None, terms: int = 3, blocks: int | None = None) -> CpMap:
    """Convex mixture of unitaries that share a random block structure.

    Sharing a block decomposition keeps a nontrivial fixed-point algebra, so
    the idempotent limit is usually not a single rank-one projection.
    """
    rng = np.random.default_rng(rng)
    W = haar_unitary(n, rng)
    blocks = int(rng.integers(1, n + 1)) if blocks is None else blocks
    sizes = _block_sizes(n, blocks, rng)
    p = rng.dirichlet(np.ones(terms))
    return CpMap([math.sqrt(p[t]) * _block_unitary(W, sizes, rng) for t in range(terms)])


def random_idempotent_family(n: int, k: int, rng=None, blocks: int | None = None) -> list:
    """``k`` idempotent superoperators whose composition has a nonzero limit.

    Every member is the limit of a bistochastic channel (a block unitary
    mixture, a pinching onto a refinement of the blocks, or both composed)
    built on one shared block decomposition.  The block-diagonal algebra's
    center is fixed by all of them, so the limit of any product keeps at
    least ``blocks`` dimensions (two or more unless ``n = 1``).
    """
    rng = np.random.default_rng(rng)
    W = haar_unitary(n, rng)
    if blocks is None:
        blocks = int(rng.integers(min(2, n), n + 1))
    sizes = _block_sizes(n, blocks, rng)
    edges = np.concatenate([[0], np.cumsum(sizes)])
    family = []
    for _ in range(k):
        kind = int(rng.integers(3))
        ops = []
        if kind != 1:
            p = rng.dirichlet(np.ones(2))
            mix = CpMap([math.sqrt(p[t]) * _block_unitary(W, sizes, rng) for t in range(2)])
        if kind != 0:
            # split each block into random sub-blocks inside a rotated copy of it
            V = _block_unitary(W, sizes, rng) @ W  # columns of each block span that block
            for b in range(blocks):
                cols = V[:, edges[b]:edges[b + 1]]
                cut = int(rng.integers(1, sizes[b] + 1))
                for part in (cols[:, :cut], cols[:, cut:]):
                    if part.shape[1]:
                        ops.append(part @ part.conj().T)
            pinch = CpMap(ops)
        ch = mix if kind == 0 else pinch if kind == 1 else pinch.compose(mix)
        family.append(omega_limit(ch))
    return family


def random_compression(n: int, rng=None) -> CpMap:
    """``M -> P M P`` for a random orthogonal projection ``P``."""
    rng = np.random.default_rng(rng)
    U = haar_unitary(n, rng)
    k = int(rng.integers(1, n + 1))
    P = U[:, :k] @ U[:, :k].conj().T
    return CpMap([P])


def random_sub_bistochastic(n: int, rng=None) -> CpMap:
    """A random sub-bistochastic channel built from unitaries, pinchings and compressions."""
    rng = np.random.default_rng(rng)
    kind = int(rng.integers(6))
    if kind == 0:
        return CpMap([haar_unitary(n, rng)])
    if kind == 1:
        return random_unitary_mixture(n, rng)
    if kind == 2:
        return random_measurement(n, rng)
    if kind == 3:
        return random_measurement(n, rng).compose(random_unitary_mixture(n, rng, blocks=n))
    if kind == 4:
        return random_compression(n, rng).compose(random_unitary_mixture(n, rng))
    s = math.sqrt(rng.uniform(0.2, 1.0))
    base = random_unitary_mixture(n, rng)
    return CpMap([s * V for V in base.kraus])


def random_idempotent(n: int, rng=None) -> np.ndarray:
    """Superoperator of the idempotent limit of a random sub-bistochastic map."""
    return omega_limit(random_sub_bistochastic(n, rng))


# --------------------------------------------------------------------------
# automata


class MmBqfa:
    """Measure-many automaton with a bistochastic channel per symbol.

    Symbols without a channel act as the identity.
    """

    model = "mm-bqfa"

    def __init__(self, alphabet: Alphabet, partition: StatePartition, channels: dict,
                 validate: bool = True, tol: float = 1e-9):
        self.alphabet = alphabet
        self.partition = partition
        n = len(partition)
        for a, ch in channels.items():
            check_symbol(alphabet, a)
            if ch.shape != (n, n):
                raise ValidationError(f"channel of {a!r} has shape {ch.shape}, expected {(n, n)}")
            if validate and not is_bistochastic(ch, tol):
                raise ValidationError(f"channel of {a!r} is not bistochastic")
        self.channels = dict(channels)

    def __len__(self):
        return len(self.partition)


def mmqfa_as_bqfa(a: Mmqfa) -> MmBqfa:
    """Embed a unitary automaton as single-Kraus channels."""
    return MmBqfa(a.alphabet, a.partition, {s: CpMap([U]) for s, U in a.unitaries.items()})


def _live_dict(partition, weights, tol=1e-15):
    non = np.flatnonzero(partition.masks["non"])
    return {partition.states[i]: float(weights[i]) for i in non if weights[i] > tol}


class _MmqfaStepper:
    def __init__(self, a: Mmqfa):
        self.a = a
        m = a.partition.masks
        self.acc, self.rej, self.non = m["acc"], m["rej"], m["non"]

    def start(self):
        psi = np.zeros(len(self.a.partition), dtype=complex)
        psi[self.a.partition.index[self.a.partition.initial]] = 1.0
        return psi, 0.0, 0.0

    def step(self, state, symbol):
        psi, pa, pr = state
        U = self.a.unitaries.get(symbol)
        if U is not None:
            psi = U @ psi
        prob = np.abs(psi) ** 2
        pa += float(prob[self.acc].sum())
        pr += float(prob[self.rej].sum())
        psi = np.where(self.non, psi, 0)
        return psi, pa, pr

    def result(self, state):
        psi, pa, pr = state
        return HaltingDistribution(_live_dict(self.a.partition, np.abs(psi) ** 2), pa, pr)


class _MmBqfaStepper:
    def __init__(self, a: MmBqfa):
        self.a = a
        m = a.partition.masks
        self.acc, self.rej, self.non = m["acc"], m["rej"], m["non"]

    def start(self):
        n = len(self.a.partition)
        rho = np.zeros((n, n), dtype=complex)
        q = self.a.partition.index[self.a.partition.initial]
        rho[q, q] = 1.0
        return rho, 0.0, 0.0

    def step(self, state, symbol):
        rho, pa, pr = state
        ch = self.a.channels.get(symbol)
        if ch is not None:
            rho = ch(rho)
        d = np.real(np.diag(rho))
        pa += float(d[self.acc].sum())
        pr += float(d[self.rej].sum())
        keep = self.non
        rho = rho * np.outer(keep, keep)
        return rho, pa, pr

    def result(self, state):
        rho, pa, pr = state
        return HaltingDistribution(_live_dict(self.a.partition, np.real(np.diag(rho))), pa, pr)


register_stepper(Mmqfa, lambda a, exact: _MmqfaStepper(a))
register_stepper(MmBqfa, lambda a, exact: _MmBqfaStepper(a))


def _run(stepper, alphabet, w, tol):
    alphabet.check_word(w)
    st = stepper.start()
    for sym in (START, *w, END):
        st = stepper.step(st, sym)
    out = stepper.result(st)
    if out.residual > tol:
        raise SemanticsError(f"live mass {out.residual:.3e} remains after the end-marker")
    return out


def run_mmqfa(a: Mmqfa, w: str, tol: float = 1e-9) -> HaltingDistribution:
    """Measure-many run on ``# w $`` with an unnormalized amplitude vector."""
    return _run(_MmqfaStepper(a), a.alphabet, w, tol)


def run_mmbqfa(a: MmBqfa, w: str, tol: float = 1e-9) -> HaltingDistribution:
    """Measure-many run on ``# w $`` with a scaled density matrix."""
    return _run(_MmBqfaStepper(a), a.alphabet, w, tol)


def run_mobqfa(alphabet: Alphabet, channels: dict, initial: int, accepting, w: str) -> float:
    """Measure-once semantics: apply every channel, then measure once.

    Parameters
    ----------
    channels : dict
        Symbol to :class:`CpMap`; missing symbols act as the identity.
    initial : int
        Index of the initial basis state.
    accepting : array_like of bool or int
        Mask (or index list) of accepting basis states.
    """
    alphabet.check_word(w)
    n = next(iter(channels.values())).dim if channels else None
    if n is None:
        raise InputError("need at least one channel to fix the dimension")
    rho = np.zeros((n, n), dtype=complex)
    rho[initial, initial] = 1.0
    for sym in (START, *w, END):
        ch = channels.get(sym)
        if ch is not None:
            rho = ch(rho)
    acc = np.zeros(n, dtype=bool)
    acc[np.asarray(accepting)] = True
    return float(np.real(np.diag(rho))[acc].sum())
