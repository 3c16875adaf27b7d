"""Sparse vectors in the qubit-string Fock space.

A :class:`FockVector` is a finite superposition of classical bit strings of
any length, the empty string ``""`` being the vacuum.  Strings of different
lengths live in orthogonal sectors, so the inner product is simply the sum
over common strings.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import EnumerationGuardError

PRUNE_TOL = 1e-12
COMPARE_TOL = 1e-9
MAX_BITS = 64
DEFAULT_MAX_TERMS = 1 << 16


def _check_bits(bits: str, max_bits: int | None = MAX_BITS) -> str:
    if not isinstance(bits, str) or any(c not in "01" for c in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    if max_bits is not None and len(bits) > max_bits:
        raise ValueError(f"bit string of length {len(bits)} exceeds max_bits={max_bits}")
    return bits


class FockVector:
    """Immutable sparse map ``bit string -> complex amplitude``."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes: Mapping[str, complex] | Iterable[tuple[str, complex]] = (), *, _trusted=False):
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        amps: dict[str, complex] = {}
        for bits, a in items:
            if not _trusted:
                _check_bits(bits, None)
            amps[bits] = amps.get(bits, 0j) + complex(a)
        self._amps = {s: a for s, a in amps.items() if abs(a) >= PRUNE_TOL}

    @classmethod
    def basis(cls, bits: str, max_bits: int | None = MAX_BITS) -> "FockVector":
        return cls({_check_bits(bits, max_bits): 1.0})

    @classmethod
    def from_json(cls, data, max_bits: int | None = MAX_BITS) -> "FockVector":
        if not isinstance(data, dict):
            raise ValueError("Fock vector JSON must map bit strings to [re, im]")
        amps = {}
        for bits, pair in data.items():
            _check_bits(bits, max_bits)
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValueError(f"amplitude for {bits!r} must be [re, im]")
            amps[bits] = complex(float(pair[0]), float(pair[1]))
        return cls(amps)

    def to_json(self) -> dict:
        return {s: [a.real, a.imag] for s, a in sorted(self._amps.items(), key=lambda kv: (len(kv[0]), kv[0]))}

    def items(self):
        return self._amps.items()

    def support(self):
        return self._amps.keys()

    def __getitem__(self, bits: str) -> complex:
        return self._amps.get(bits, 0j)

    def __len__(self) -> int:
        return len(self._amps)

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self._amps.values())))

    def lengths(self) -> set:
        return {len(s) for s in self._amps}

    def is_length_state(self) -> bool:
        return len(self.lengths()) == 1

    def __add__(self, other: "FockVector") -> "FockVector":
        amps = dict(self._amps)
        for s, a in other.items():
            amps[s] = amps.get(s, 0j) + a
        return FockVector(amps, _trusted=True)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + (-1) * other

    def __mul__(self, scalar) -> "FockVector":
        return FockVector({s: scalar * a for s, a in self._amps.items()}, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "FockVector":
        return self * (1 / scalar)

    def allclose(self, other: "FockVector", tol: float = COMPARE_TOL) -> bool:
        return (self - other).norm() <= tol

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.6g})|{s or 'ø'}>" for s, a in sorted(self._amps.items()))
        return f"FockVector({terms or '0'})"


def concat(*vectors: FockVector) -> FockVector:
    """Concatenation, extended bilinearly from bit strings to superpositions."""
    if not vectors:
        return FockVector({"": 1.0})
    out = vectors[0]
    for v in vectors[1:]:
        amps: dict[str, complex] = {}
        for s, a in out.items():
            for t, b in v.items():
                key = s + t
                amps[key] = amps.get(key, 0j) + a * b
        out = FockVector(amps, _trusted=True)
    return out


def inner(x: FockVector, y: FockVector) -> complex:
    """``<x|y>``, antilinear in ``x``."""
    if len(x) > len(y):
        return sum((np.conj(x[s]) * b for s, b in y.items()), 0j)
    return sum((np.conj(a) * y[s] for s, a in x.items()), 0j)


def length_expectation(state, tol: float = COMPARE_TOL) -> float:
    """Expected value of the length observable.

    ``state`` is a normalized :class:`FockVector` or an iterable of
    ``(FockVector, probability)`` pairs describing a mixture.
    """
    if isinstance(state, FockVector):
        mixture = [(state, 1.0)]
    else:
        mixture = list(state)
        total = sum(float(p) for _, p in mixture)
        if abs(total - 1.0) > tol:
            raise ValueError(f"mixture probabilities sum to {total!r}, not 1")
    value = 0.0
    for vec, p in mixture:
        nsq = sum(abs(a) ** 2 for _, a in vec.items())
        if abs(nsq - 1.0) > tol:
            raise ValueError(f"state is not normalized (norm^2 = {nsq!r})")
        value += float(p) * sum(abs(a) ** 2 * len(s) for s, a in vec.items())
    return value


def gram_deviation(vectors: Sequence[FockVector]) -> float:
    """``max |G - I|`` for the Gram matrix of ``vectors``, computed sparsely."""
    index: dict[str, int] = {}
    rows, cols, data = [], [], []
    for r, v in enumerate(vectors):
        for s, a in v.items():
            rows.append(r)
            cols.append(index.setdefault(s, len(index)))
            data.append(a)
    n = len(vectors)
    a = sp.csr_matrix((np.array(data, dtype=complex), (rows, cols)), shape=(n, max(len(index), 1)))
    gram = (a @ a.conj().T - sp.identity(n, dtype=complex, format="csr")).tocoo()
    return float(np.max(np.abs(gram.data))) if gram.nnz else 0.0


def is_orthonormal(vectors: Sequence[FockVector], tol: float = COMPARE_TOL) -> bool:
    return gram_deviation(vectors) <= tol


def concatenations(families: Sequence[Sequence[FockVector]]) -> list:
    """``f1[v1] o f2[v2] o ...`` for every index tuple, in lexicographic order."""
    out = [FockVector({"": 1.0})]
    for fam in families:
        out = [concat(a, b) for a in out for b in fam]
    return out


def _guard_terms(d: int, m: int, max_terms: int) -> None:
    if d**m > max_terms:
        raise EnumerationGuardError("codeword concatenations", d**m, max_terms)


def is_prefix_free(words: Iterable[str]) -> bool:
    """True iff no word is a prefix of another (duplicates count as prefixes)."""
    ordered = sorted(words)
    return all(not b.startswith(a) for a, b in zip(ordered, ordered[1:]))


def classically_certified(vectors: Sequence[FockVector], tol: float = COMPARE_TOL) -> bool:
    """Each vector is a single bit string of unit modulus and the strings are prefix-free.

    Such a family is jointly orthonormal for every number of concatenations.
    """
    words = []
    for v in vectors:
        if len(v) != 1:
            return False
        (s, a), = v.items()
        if abs(abs(a) - 1.0) > tol:
            return False
        words.append(s)
    return is_prefix_free(words)


def is_jointly_orthonormal(
    vectors: Sequence[FockVector],
    m: int,
    max_terms: int = DEFAULT_MAX_TERMS,
    tol: float = COMPARE_TOL,
) -> bool:
    """Are all ``D**m`` ``m``-fold concatenations orthonormal?

    Only the given ``m`` is checked; :func:`classically_certified` covers
    every ``m`` for families of prefix-free bit strings.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    _guard_terms(len(vectors), m, max_terms)
    return is_orthonormal(concatenations([vectors] * m), tol)


def check_unique_decodability(codes: Sequence, max_terms: int = DEFAULT_MAX_TERMS, tol: float = COMPARE_TOL) -> bool:
    """Is the concatenation of the isometries ``codes[0] o ... o codes[m-1]`` an isometry?

    Equivalent to orthonormality of every concatenation of one codeword per
    code.  Each element of ``codes`` must provide ``codewords()``.
    """
    families = [list(c.codewords()) for c in codes]
    if not families:
        raise ValueError("need at least one code")
    dims = {len(f) for f in families}
    if len(dims) != 1:
        raise ValueError(f"codes have different domain dimensions {sorted(dims)}")
    _guard_terms(dims.pop(), len(families), max_terms)
    return is_orthonormal(concatenations(families), tol)


def quantum_kraft_check(codewords: Sequence[FockVector]) -> tuple:
    """``(sum 2**-length, sum <= 1)`` for a family of length states."""
    total = Fraction(0)
    for i, v in enumerate(codewords):
        if len(v) == 0 or not v.is_length_state():
            raise ValueError(f"codeword {i} is not a length state")
        (ell,) = v.lengths()
        total += Fraction(1, 2**ell)
    s = float(total)
    return s, s <= 1 + 1e-12
