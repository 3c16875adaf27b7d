"""Kraft-feasible length vectors and minimization of the block coding cost.

The cost of a code with sorted lengths ``l_1 <= ... <= l_D`` is a linear
functional ``sum_i Q_i l_i`` where ``Q`` is a nonincreasing weight profile:

* adaptive codes: ``Q = sum_k sum_h p(h) * eig(rho^h)``, one descending
  conditional spectrum per positive-probability history ``h`` of block ``k``;
* constrained codes: ``Q = sum_k eig(rho^k)`` over the block ensemble states.

Minimizing over Kraft-feasible integer lengths is a Huffman problem;
:func:`optimal_lengths_bruteforce` enumerates the feasible set directly and
serves as the independent check.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .ensemble import BlockEnsemble
from .errors import EnumerationGuardError, OracleMismatchError
from .source_model import BlockConfig, SourceModel

MASS_TOL = 1e-9
ORACLE_TOL = 1e-9
METHODS = ("huffman", "bruteforce", "both")
DEFAULT_MAX_CANDIDATES = 10**6


def kraft_sum(lengths: Sequence[int]) -> Fraction:
    return sum((Fraction(1, 2**l) for l in lengths), Fraction(0))


def kraft_feasible(lengths: Sequence[int]) -> bool:
    """Exact test of ``sum 2**-l_i <= 1``."""
    lengths = [int(l) for l in lengths]
    if any(l < 0 for l in lengths):
        return False
    if not lengths:
        return True
    top = max(lengths)
    return sum(1 << (top - l) for l in lengths) <= 1 << top


@dataclass(frozen=True)
class LengthVector:
    """Nondecreasing, Kraft-feasible codeword lengths (qubits)."""

    lengths: tuple

    def __post_init__(self):
        lengths = tuple(int(l) for l in self.lengths)
        if not lengths:
            raise ValueError("length vector is empty")
        if any(l < 0 for l in lengths):
            raise ValueError(f"negative length in {lengths}")
        if any(a > b for a, b in zip(lengths, lengths[1:])):
            raise ValueError(f"lengths must be nondecreasing, got {lengths}")
        if 0 in lengths and len(lengths) > 1:
            raise ValueError("a zero length is only allowed for a one-dimensional code")
        if not kraft_feasible(lengths):
            raise ValueError(f"lengths {lengths} violate the Kraft inequality")
        object.__setattr__(self, "lengths", lengths)

    def __len__(self) -> int:
        return len(self.lengths)

    def __iter__(self):
        return iter(self.lengths)

    def __getitem__(self, i):
        return self.lengths[i]

    def kraft_sum(self) -> Fraction:
        return kraft_sum(self.lengths)


@dataclass(frozen=True)
class WeightProfile:
    """Nonincreasing nonnegative weights multiplying the sorted lengths."""

    weights: tuple
    total_mass: float

    def __post_init__(self):
        w = tuple(self.weights)
        if not w:
            raise ValueError("weight profile is empty")
        if any(x < 0 for x in w):
            raise ValueError(f"negative weight in {w}")
        if any(a < b - 1e-12 for a, b in zip(w, w[1:])):
            raise ValueError("weights must be nonincreasing")
        if abs(sum(w) - self.total_mass) > MASS_TOL:
            raise ValueError(f"weights sum to {float(sum(w))!r}, expected total mass {self.total_mass}")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    def exact(self) -> "WeightProfile":
        """Same profile with each weight converted exactly to a Fraction."""
        w = tuple(Fraction(x) for x in self.weights)
        return WeightProfile(w, sum(w))


class Optimum(NamedTuple):
    value: float
    lengths: LengthVector


def _as_lengths(lengths) -> tuple:
    if isinstance(lengths, LengthVector):
        return lengths.lengths
    return tuple(int(l) for l in lengths)


def evaluate(profile: WeightProfile, lengths) -> float:
    """``sum_i Q_i l_i``; exact when the weights are Fractions."""
    ls = _as_lengths(lengths)
    if len(ls) != len(profile.weights):
        raise ValueError(f"dimension mismatch: {len(profile.weights)} weights, {len(ls)} lengths")
    terms = [q * l for q, l in zip(profile.weights, ls)]
    if any(isinstance(t, Fraction) for t in terms):
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def optimal_lengths_huffman(profile: WeightProfile) -> LengthVector:
    """Huffman code lengths, sorted so the shortest goes with the largest weight.

    Ties pop in ``(weight, sequence number)`` order; merged nodes take the
    next sequence number.
    """
    w = profile.weights
    if len(w) == 1:
        return LengthVector((0,))
    depth = [0] * len(w)
    heap = [(q, i, (i,)) for i, q in enumerate(w)]
    heapq.heapify(heap)
    seq = len(w)
    while len(heap) > 1:
        wa, _, a = heapq.heappop(heap)
        wb, _, b = heapq.heappop(heap)
        for leaf in a + b:
            depth[leaf] += 1
        heapq.heappush(heap, (wa + wb, seq, a + b))
        seq += 1
    return LengthVector(tuple(sorted(depth)))


def optimal_lengths_bruteforce(
    profile: WeightProfile,
    max_len: int | None = None,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> LengthVector:
    """Exhaustive minimum over nondecreasing Kraft-feasible vectors with entries in ``1..max_len``.

    ``max_len`` defaults to ``D - 1``, the deepest a Huffman tree over ``D``
    leaves can get.  Ties resolve to the lexicographically smallest vector.
    """
    d = len(profile.weights)
    if d == 1:
        return LengthVector((0,))
    if max_len is None:
        max_len = d - 1
    if max_len < 1 or 2**max_len < d:
        raise ValueError(f"max_len={max_len} admits no feasible code for D={d}")

    budget = 1 << max_len
    best: tuple | None = None
    visited = 0
    prefix: list[int] = []

    def search(start: int, used: int) -> None:
        nonlocal best, visited
        visited += 1
        if visited > max_candidates:
            raise EnumerationGuardError("length search", visited, max_candidates)
        if len(prefix) == d:
            key = (evaluate(profile, prefix), tuple(prefix))
            if best is None or key < best:
                best = key
            return
        remaining = d - len(prefix) - 1
        for l in range(start, max_len + 1):
            cost = 1 << (max_len - l)
            # the cheapest completion puts every later entry at max_len
            if used + cost + remaining > budget:
                continue
            prefix.append(l)
            search(l, used + cost)
            prefix.pop()

    search(1, 0)
    assert best is not None
    return LengthVector(best[1])


def minimize(
    profile: WeightProfile,
    method: str = "huffman",
    rational: bool = False,
    max_len: int | None = None,
) -> Optimum:
    """Minimize ``evaluate(profile, .)`` over the Kraft-feasible set.

    ``method="both"`` runs Huffman and the exhaustive search and raises
    :class:`OracleMismatchError` unless the two minima agree (exactly when
    ``rational``, else within ``1e-9``).
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if rational:
        profile = profile.exact()
    if method == "bruteforce":
        lengths = optimal_lengths_bruteforce(profile, max_len)
        return Optimum(evaluate(profile, lengths), lengths)
    lengths = optimal_lengths_huffman(profile)
    value = evaluate(profile, lengths)
    if method == "both":
        oracle = optimal_lengths_bruteforce(profile, max_len)
        oracle_value = evaluate(profile, oracle)
        agree = value == oracle_value if rational else abs(value - oracle_value) <= ORACLE_TOL
        if not agree:
            raise OracleMismatchError(
                f"huffman {lengths.lengths} -> {value} but exhaustive search {oracle.lengths} -> {oracle_value}"
            )
    return Optimum(value, lengths)


def adaptive_weights(model: SourceModel, cfg: BlockConfig, ensemble: BlockEnsemble | None = None) -> WeightProfile:
    """Weights of the adaptive (history-dependent) cost functional."""
    cfg.guard_histories(model.size)
    be = ensemble or BlockEnsemble(model, cfg)
    total = sum(be.averaged_conditional_eigenvalues(k) for k in range(1, cfg.block_count + 1))
    return WeightProfile(tuple(float(x) for x in total), cfg.block_count)


def constrained_weights(model: SourceModel, cfg: BlockConfig, ensemble: BlockEnsemble | None = None) -> WeightProfile:
    """Weights of the constrained (one isometry per block) cost functional."""
    cfg.guard_histories(model.size)
    be = ensemble or BlockEnsemble(model, cfg)
    total = sum(be.block_spectrum(k).values for k in range(1, cfg.block_count + 1))
    return WeightProfile(tuple(float(x) for x in total), cfg.block_count)


def ils(model: SourceModel, cfg: BlockConfig, method: str = "huffman", rational: bool = False) -> Optimum:
    """Minimum average codeword length over adaptive special block codes."""
    return minimize(adaptive_weights(model, cfg), method, rational)


def ilc(model: SourceModel, cfg: BlockConfig, method: str = "huffman", rational: bool = False) -> Optimum:
    """Minimum average codeword length over constrained special block codes."""
    return minimize(constrained_weights(model, cfg), method, rational)
