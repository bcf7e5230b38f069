"""Exact n-qubit Pauli arithmetic and stabilizer codes.

A Pauli operator is stored as ``(phase, x, z)`` where ``x`` and ``z`` are
integer bitmasks (bit ``q`` is qubit ``q``, counted from the left of the
string) and ``phase`` is the power of ``i`` mod 4.  The dense realization is::

    i**phase * kron_q (X**x_q @ Z**z_q)

so ``Y = i X Z``.  Qubit 0 is the most significant tensor factor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import InvalidGroup, ParseError, SizeMismatch, TooLarge
from .linalg import DEFAULT_TOL, Tolerance

DENSE_CAP = 12

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_SINGLE = {
    (0, 0): np.eye(2, dtype=np.complex128),
    (1, 0): _X,
    (0, 1): _Z,
    (1, 1): _X @ _Z,
}
_PREFIX = {"+": 0, "-": 2, "+i": 1, "-i": 3}


@dataclass(frozen=True)
class PauliOperator:
    n: int
    phase: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a Pauli operator acts on at least one qubit")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("bit masks exceed qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_bits(cls, x_bits: Sequence[int], z_bits: Sequence[int], phase: int = 0) -> "PauliOperator":
        if len(x_bits) != len(z_bits):
            raise SizeMismatch("x and z bit vectors differ in length")
        x = sum(1 << q for q, b in enumerate(x_bits) if b)
        z = sum(1 << q for q, b in enumerate(z_bits) if b)
        return cls(len(x_bits), phase, x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, 0, 0, 0)

    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple((self.x >> q) & 1 for q in range(self.n))

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple((self.z >> q) & 1 for q in range(self.n))

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_hermitian(self) -> bool:
        return (self.phase + (self.x & self.z).bit_count()) % 2 == 0

    def adjoint(self) -> "PauliOperator":
        # (X^x Z^z)^H = Z^z X^x = (-1)^{x.z} X^x Z^z
        return PauliOperator(self.n, -self.phase + 2 * (self.x & self.z).bit_count(), self.x, self.z)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return pauli_mul(self, other)

    def __str__(self) -> str:
        # render with Y absorbing one factor of i per XZ site
        ph = (self.phase - (self.x & self.z).bit_count()) % 4
        body = "".join("IXZY"[((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)] for q in range(self.n))
        return ("+", "+i", "-", "-i")[ph] + body


def pauli_parse(s: str) -> PauliOperator:
    """Parse ``[phase]body`` with phase in ``{+, -, +i, -i}`` and body over ``IXYZ``."""
    text = s.strip()
    pos = 0
    phase = 0
    for prefix in ("+i", "-i", "+", "-"):
        if text.startswith(prefix):
            phase = _PREFIX[prefix]
            pos = len(prefix)
            break
    body = text[pos:]
    if not body:
        raise ParseError(s, pos, "empty Pauli body")
    x = z = 0
    for q, c in enumerate(body):
        if c == "I":
            continue
        if c == "X":
            x |= 1 << q
        elif c == "Z":
            z |= 1 << q
        elif c == "Y":
            x |= 1 << q
            z |= 1 << q
            phase += 1
        else:
            raise ParseError(s, pos + q, f"unexpected character {c!r}")
    return PauliOperator(len(body), phase, x, z)


def _same_n(p: PauliOperator, q: PauliOperator):
    if p.n != q.n:
        raise SizeMismatch(f"Pauli operators act on {p.n} and {q.n} qubits")


def pauli_mul(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    _same_n(p, q)
    # moving each Z of p past an X of q costs a sign
    swaps = (p.z & q.x).bit_count()
    return PauliOperator(p.n, p.phase + q.phase + 2 * swaps, p.x ^ q.x, p.z ^ q.z)


def pauli_commutes(p: PauliOperator, q: PauliOperator) -> bool:
    _same_n(p, q)
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2 == 0


def pauli_to_matrix(p: PauliOperator, cap: int = DENSE_CAP) -> np.ndarray:
    if p.n > cap:
        raise TooLarge(f"dense realization of {p.n} qubits exceeds cap {cap}")
    factors = [_SINGLE[((p.x >> q) & 1, (p.z >> q) & 1)] for q in range(p.n)]
    return (1j ** p.phase) * reduce(np.kron, factors)


# ---------------------------------------------------------------- GF(2)

def _row(p: PauliOperator) -> int:
    return p.x | (p.z << p.n)


class _Eliminator:
    """Incremental GF(2) row reduction that remembers which Pauli product made each pivot row."""

    def __init__(self, n: int):
        self.n = n
        self.pivots: dict[int, tuple[int, PauliOperator]] = {}

    def reduce(self, p: PauliOperator) -> tuple[int, PauliOperator]:
        row = _row(p)
        acc = PauliOperator.identity(self.n)
        while row:
            top = row.bit_length() - 1
            if top not in self.pivots:
                break
            prow, prod = self.pivots[top]
            row ^= prow
            acc = pauli_mul(acc, prod)
        return row, acc

    def add(self, p: PauliOperator) -> bool:
        row, acc = self.reduce(p)
        if row == 0:
            return False
        self.pivots[row.bit_length() - 1] = (row, pauli_mul(acc, p))
        return True


class ErrorClass(enum.Enum):
    STABILIZER_COSET = "StabilizerCoset"
    LOGICAL = "Logical"
    DETECTABLE = "Detectable"


@dataclass(frozen=True, eq=False)
class StabilizerGroup:
    """Abelian Pauli subgroup not containing ``-I``, given by independent generators."""

    n: int
    generators: tuple[PauliOperator, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise InvalidGroup("nonempty", "at least one generator is required")
        for i, g in enumerate(gens):
            if g.n != self.n:
                raise SizeMismatch(f"generator {i} acts on {g.n} qubits, expected {self.n}")
            if not g.is_hermitian():
                raise InvalidGroup("no -I", f"generator {i} ({g}) squares to -I")
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                if not pauli_commutes(gens[i], gens[j]):
                    raise InvalidGroup("commuting", f"generators {i} and {j} anti-commute")
        elim = _Eliminator(self.n)
        for i, g in enumerate(gens):
            row, acc = elim.reduce(g)
            if row == 0:
                # the product of earlier generators has the same bits; -I is in the
                # group if the phases disagree, otherwise the generator is redundant
                rel = pauli_mul(acc.adjoint(), g)
                if rel.phase != 0:
                    raise InvalidGroup("no -I", f"generator {i} times earlier generators gives {rel}")
                raise InvalidGroup("independent", f"generator {i} is a product of earlier generators")
            elim.add(g)
        object.__setattr__(self, "_elim", elim)

    @classmethod
    def from_strings(cls, generators: Sequence[str] | str) -> "StabilizerGroup":
        if isinstance(generators, str):
            generators = [g for g in generators.split(",") if g.strip()]
        gens = [pauli_parse(g) for g in generators]
        if not gens:
            raise InvalidGroup("nonempty", "at least one generator is required")
        return cls(gens[0].n, tuple(gens))

    @property
    def code_dimension(self) -> int:
        return 2 ** (self.n - len(self.generators))

    def element_for_bits(self, p: PauliOperator) -> PauliOperator | None:
        """Group element with the same bits as ``p`` or ``None``."""
        _same_n(p, self.generators[0])
        row, acc = self._elim.reduce(p)  # type: ignore[attr-defined]
        return acc if row == 0 else None


def stabilizer_projection(s: StabilizerGroup, cap: int = DENSE_CAP) -> np.ndarray:
    """Code projection ``prod_g (I + g) / 2``."""
    if s.n > cap:
        raise TooLarge(f"dense projection on {s.n} qubits exceeds cap {cap}")
    dim = 2 ** s.n
    eye = np.eye(dim, dtype=np.complex128)
    p = eye
    for g in s.generators:
        p = p @ (0.5 * (eye + pauli_to_matrix(g, cap)))
    return p


def classify_error(s: StabilizerGroup, e: PauliOperator) -> ErrorClass:
    """Tag ``e`` as a detectable error, a stabilizer-coset element, or a logical operator.

    Phases are ignored for coset membership; see :func:`coset_phase`.
    """
    if any(not pauli_commutes(e, g) for g in s.generators):
        return ErrorClass.DETECTABLE
    if s.element_for_bits(e) is not None:
        return ErrorClass.STABILIZER_COSET
    return ErrorClass.LOGICAL


def coset_phase(s: StabilizerGroup, e: PauliOperator) -> int | None:
    """Power ``k`` with ``e = i**k * g`` for ``g`` in the group, or ``None``.

    ``k == 0`` means ``e`` lies in the group itself rather than only in ``<S, iI>``.
    """
    g = s.element_for_bits(e)
    if g is None:
        return None
    return pauli_mul(g.adjoint(), e).phase


@dataclass(eq=False)
class Prop41Report:
    isoclinic: bool
    pair_classes: list[list[ErrorClass]]
    kl_nontrivial_pairs: list[tuple[int, int]]
    consistent: bool
    lambdas: np.ndarray
    deviations: np.ndarray
    inconsistent_pairs: list[tuple[int, int]]
    max_residual: float


def verify_prop41(s: StabilizerGroup, errors: Sequence[PauliOperator], tol: Tolerance = DEFAULT_TOL,
                  cap: int = DENSE_CAP) -> Prop41Report:
    """Densify a stabilizer code and Pauli errors and cross-check the group-theoretic
    classification of every ``E_i^H E_j`` against the generalized KL witness.
    """
    from .isoclinic import isoclinic_family_check
    from .kl import kl_general_check, phase_deviation, range_projections

    errors = list(errors)
    for i, e in enumerate(errors):
        if e.n != s.n:
            raise SizeMismatch(f"error {i} acts on {e.n} qubits, expected {s.n}")
    p_c = stabilizer_projection(s, cap)
    dense = [pauli_to_matrix(e, cap) for e in errors]
    n = len(errors)

    if n >= 2:
        report = isoclinic_family_check(range_projections(dense, p_c, tol), tol)
        isoclinic, worst = report.verdict, report.worst_residual
    else:
        isoclinic, worst = True, 0.0

    witness = kl_general_check(dense, p_c, tol)
    classes = [[classify_error(s, pauli_mul(errors[i].adjoint(), errors[j])) for j in range(n)] for i in range(n)]
    lam = witness.lambdas.real
    dev = np.zeros((n, n))
    nontrivial, bad = [], []
    for i in range(n):
        for j in range(n):
            zero = lam[i, j] <= tol.abs_tol
            dev[i, j] = 0.0 if zero else phase_deviation(witness.unitaries[i][j], p_c, tol)
            trivial = dev[i, j] <= tol.bound(1.0)
            if not zero and not trivial:
                nontrivial.append((i, j))
            tag = classes[i][j]
            ok = {
                ErrorClass.LOGICAL: not zero and not trivial,
                ErrorClass.DETECTABLE: zero,
                ErrorClass.STABILIZER_COSET: not zero and trivial,
            }[tag]
            if not ok:
                bad.append((i, j))
    return Prop41Report(
        isoclinic=isoclinic,
        pair_classes=classes,
        kl_nontrivial_pairs=nontrivial,
        consistent=not bad,
        lambdas=lam,
        deviations=dev,
        inconsistent_pairs=bad,
        max_residual=max(worst, witness.max_residual),
    )
