"""Quantum stochastic sources: a pure-state alphabet driven by a classical process.

Symbol indices are 1-based in the public API (``seq=(1, 2)`` means
``|s_1>`` then ``|s_2>``).  Internally everything is 0-based.

Three process variants are supported:

* :class:`IIDProcess` -- independent, identically distributed emissions.
* :class:`MarkovProcess` -- order-``r`` Markov chain with an explicit initial
  distribution over the first ``r`` symbols.
* :class:`HistoryTable` -- arbitrary history-dependent conditionals, specified
  exactly up to a finite depth.

Probabilities may be floats or :class:`fractions.Fraction`; the arithmetic
here never mixes in floats, so a model converted with
:meth:`SourceModel.exact` yields exact rational probabilities.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import EnumerationGuardError, SourceError, UndefinedConditionalError

PROB_TOL = 1e-9
NORM_TOL = 1e-9
DEFAULT_MAX_ENUMERATION = 10**6


def _check_distribution(values, what: str) -> tuple:
    vals = tuple(values)
    if not vals:
        raise SourceError(f"{what}: empty probability vector")
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float, Fraction)):
            raise SourceError(f"{what}: non-numeric probability {v!r}")
        if not math.isfinite(v) or v < 0:
            raise SourceError(f"{what}: invalid probability {v!r}")
    if abs(sum(vals) - 1) > PROB_TOL:
        raise SourceError(f"{what}: probabilities sum to {float(sum(vals))!r}, not 1")
    return vals


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    # the decimal repr, so 0.9 becomes 9/10 rather than its binary expansion
    return Fraction(repr(float(x)))


@dataclass(frozen=True, eq=False)
class StateAlphabet:
    """``N`` unit vectors in ``C^d``, stored as the rows of an ``(N, d)`` array."""

    states: np.ndarray

    def __post_init__(self):
        states = np.array(self.states, dtype=complex)
        if states.ndim == 1:
            states = states[None, :]
        if states.ndim != 2 or states.shape[0] < 1 or states.shape[1] < 1:
            raise SourceError(f"alphabet must be a non-empty (N, d) array, got shape {states.shape}")
        norms = np.linalg.norm(states, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise SourceError(f"alphabet states must have unit norm, got norms {norms}")
        if np.linalg.matrix_rank(states, tol=1e-9) != states.shape[1]:
            raise SourceError("alphabet states do not span the state space")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def product_state(self, seq0: Sequence[int]) -> np.ndarray:
        """Tensor product of the states for a 0-based symbol sequence."""
        vec = np.ones(1, dtype=complex)
        for n in seq0:
            vec = np.kron(vec, self.states[n])
        return vec

    def product_matrix(self, q: int) -> np.ndarray:
        """All ``N**q`` product states as rows, in lexicographic sequence order."""
        mat = np.ones((1, 1), dtype=complex)
        for _ in range(q):
            mat = np.einsum("ai,bj->abij", mat, self.states).reshape(
                mat.shape[0] * self.size, mat.shape[1] * self.dimension
            )
        return mat


@dataclass(frozen=True)
class IIDProcess:
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", _check_distribution(self.probs, "iid probs"))

    @property
    def symbols(self) -> int:
        return len(self.probs)

    max_depth = None

    def conditional_row(self, history0: tuple) -> tuple:
        return self.probs

    def converted(self, conv) -> "IIDProcess":
        return IIDProcess(tuple(conv(p) for p in self.probs))


@dataclass(frozen=True)
class MarkovProcess:
    """Order-``r`` chain.

    ``initial`` lists ``P(X_1..X_r)`` over all ``N**r`` histories in
    lexicographic order; ``transition[h]`` is the next-symbol distribution
    after the ``r``-history with lexicographic index ``h``.
    """

    order: int
    initial: tuple
    transition: tuple

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 1:
            raise SourceError(f"markov order must be a positive integer, got {self.order!r}")
        rows = tuple(_check_distribution(r, f"transition row {i}") for i, r in enumerate(self.transition))
        if not rows:
            raise SourceError("markov transition is empty")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise SourceError("markov transition rows differ in length")
        if len(rows) != n**self.order:
            raise SourceError(f"markov order {self.order} over {n} symbols needs {n**self.order} rows, got {len(rows)}")
        init = _check_distribution(self.initial, "markov initial")
        if len(init) != n**self.order:
            raise SourceError(f"markov initial needs {n**self.order} entries, got {len(init)}")
        object.__setattr__(self, "transition", rows)
        object.__setattr__(self, "initial", init)

    @classmethod
    def stationary(cls, transition, order: int = 1) -> "MarkovProcess":
        """Chain started from a stationary distribution of ``transition``."""
        rows = np.asarray(transition, dtype=float)
        n = rows.shape[1]
        size = n**order
        # chain on r-histories: h -> h[1:] + (x,)
        hist = np.zeros((size, size))
        for h in range(size):
            for x in range(n):
                hist[h, (h * n) % size + x] += rows[h, x]
        a = np.vstack([hist.T - np.eye(size), np.ones(size)])
        b = np.zeros(size + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(a, b, rcond=None)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        return cls(order, tuple(pi.tolist()), tuple(tuple(r) for r in rows.tolist()))

    @property
    def symbols(self) -> int:
        return len(self.transition[0])

    max_depth = None

    def _prefix_mass(self, prefix: tuple):
        n, r = self.symbols, self.order
        start = 0
        for j, x in enumerate(prefix):
            start += x * n ** (r - 1 - j)
        size = n ** (r - len(prefix))
        return sum(self.initial[start : start + size])

    def conditional_row(self, history0: tuple) -> tuple:
        n, r = self.symbols, self.order
        if len(history0) >= r:
            idx = 0
            for x in history0[-r:]:
                idx = idx * n + x
            return self.transition[idx]
        base = self._prefix_mass(history0)
        if base == 0:
            raise UndefinedConditionalError(tuple(x + 1 for x in history0))
        return tuple(self._prefix_mass(history0 + (x,)) / base for x in range(n))

    def converted(self, conv) -> "MarkovProcess":
        return MarkovProcess(
            self.order,
            tuple(conv(p) for p in self.initial),
            tuple(tuple(conv(p) for p in row) for row in self.transition),
        )


@dataclass(frozen=True)
class HistoryTable:
    """Conditional next-symbol distributions keyed by the exact full history.

    ``entries`` maps 0-based history tuples of length ``0..depth-1`` to
    ``N``-vectors.  Histories with zero probability may be omitted.
    """

    depth: int
    entries: Mapping[tuple, tuple]

    def __post_init__(self):
        if not isinstance(self.depth, int) or self.depth < 1:
            raise SourceError(f"table depth must be a positive integer, got {self.depth!r}")
        entries = {}
        n = None
        for key, row in self.entries.items():
            key = tuple(key)
            if len(key) >= self.depth:
                raise SourceError(f"table history {key} is not shorter than depth {self.depth}")
            row = _check_distribution(row, f"table entry {key}")
            if n is None:
                n = len(row)
            elif len(row) != n:
                raise SourceError("table rows differ in length")
            entries[key] = row
        if () not in entries:
            raise SourceError("table has no entry for the empty history")
        for key in entries:
            if any(not 0 <= x < n for x in key):
                raise SourceError(f"table history {key} has symbols outside 0..{n - 1}")
        object.__setattr__(self, "entries", entries)
        # every positive-probability history must be present
        stack = [()]
        while stack:
            hist = stack.pop()
            if len(hist) + 1 >= self.depth:
                continue
            row = entries[hist]
            for x in range(n):
                if row[x] > 0:
                    child = hist + (x,)
                    if child not in entries:
                        raise SourceError(
                            f"table lacks an entry for reachable history {tuple(y + 1 for y in child)}"
                        )
                    stack.append(child)

    @property
    def symbols(self) -> int:
        return len(self.entries[()])

    @property
    def max_depth(self) -> int:
        return self.depth

    def conditional_row(self, history0: tuple) -> tuple:
        if len(history0) >= self.depth:
            raise SourceError(f"history of length {len(history0)} exceeds table depth {self.depth}")
        try:
            return self.entries[tuple(history0)]
        except KeyError:
            raise UndefinedConditionalError(tuple(x + 1 for x in history0)) from None

    def converted(self, conv) -> "HistoryTable":
        return HistoryTable(self.depth, {k: tuple(conv(p) for p in v) for k, v in self.entries.items()})


@dataclass(frozen=True, eq=False)
class SourceModel:
    alphabet: StateAlphabet
    process: IIDProcess | MarkovProcess | HistoryTable

    def __post_init__(self):
        if self.process.symbols != self.alphabet.size:
            raise SourceError(
                f"process has {self.process.symbols} symbols but alphabet has {self.alphabet.size} states"
            )

    @property
    def size(self) -> int:
        return self.alphabet.size

    @property
    def dimension(self) -> int:
        return self.alphabet.dimension

    @property
    def max_depth(self) -> int | None:
        return self.process.max_depth

    def exact(self) -> "SourceModel":
        """Copy with every probability converted to an exact :class:`Fraction`."""
        return SourceModel(self.alphabet, self.process.converted(_to_fraction))

    @property
    def is_exact(self) -> bool:
        row = self.process.conditional_row(())
        return isinstance(row[0], Fraction)


@dataclass(frozen=True)
class BlockConfig:
    """``block_count`` blocks of ``block_size`` emissions each."""

    block_size: int
    block_count: int
    max_enumeration: int = DEFAULT_MAX_ENUMERATION

    def __post_init__(self):
        for name in ("block_size", "block_count", "max_enumeration"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def l(self) -> int:  # noqa: E743
        return self.block_size

    @property
    def m(self) -> int:
        return self.block_count

    def codeword_dim(self, d: int) -> int:
        return d**self.block_size

    def guard(self, count: int, what: str = "enumeration") -> None:
        if count > self.max_enumeration:
            raise EnumerationGuardError(what, count, self.max_enumeration)

    def guard_histories(self, n_symbols: int) -> None:
        """Enforce ``N**((m-1) l) <= max_enumeration``."""
        self.guard(n_symbols ** ((self.block_count - 1) * self.block_size), "history enumeration")

    def require_depth(self, model: SourceModel) -> None:
        depth = model.max_depth
        if depth is not None and depth < self.block_size * self.block_count:
            raise SourceError(
                f"source is specified to depth {depth} but m*l = {self.block_size * self.block_count}"
            )


def _to_zero_based(model: SourceModel, seq: Sequence[int], what: str = "sequence") -> tuple:
    out = []
    for x in seq:
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
            raise SourceError(f"{what}: symbol {x!r} is not an integer")
        if not 1 <= x <= model.size:
            raise SourceError(f"{what}: symbol index {x} outside 1..{model.size}")
        out.append(int(x) - 1)
    return tuple(out)


def _check_depth(model: SourceModel, q: int) -> None:
    depth = model.max_depth
    if depth is not None and q > depth:
        raise SourceError(f"sequence length {q} exceeds source depth {depth}")


def _prob0(process, seq0: tuple):
    p = 1
    for t in range(len(seq0)):
        if p == 0:
            return p
        p = p * process.conditional_row(seq0[:t])[seq0[t]]
    return p


def sequence_probability(model: SourceModel, seq: Sequence[int]):
    """``P(X_1 = n_1, ..., X_q = n_q)`` for a 1-based symbol sequence."""
    seq0 = _to_zero_based(model, seq)
    if not seq0:
        raise SourceError("sequence must contain at least one symbol")
    _check_depth(model, len(seq0))
    return _prob0(model.process, seq0)


def conditional_probability(model: SourceModel, next_symbols: Sequence[int], history: Sequence[int] = ()):
    """``p(next | history)``; raises :class:`UndefinedConditionalError` when ``p(history) = 0``."""
    nxt = _to_zero_based(model, next_symbols, "next")
    hist = _to_zero_based(model, history, "history")
    if not nxt:
        raise SourceError("next must contain at least one symbol")
    _check_depth(model, len(hist) + len(nxt))
    p_hist = _prob0(model.process, hist)
    if p_hist == 0:
        raise UndefinedConditionalError(history)
    return _prob0(model.process, hist + nxt) / p_hist


def joint_distribution(model: SourceModel, q: int) -> np.ndarray:
    """Array of shape ``(N,) * q`` holding ``P(X_1..X_q)``.

    Float models give a float array, exact models an object array of
    Fractions.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    _check_depth(model, q)
    n = model.size
    proc = model.process
    exact = model.is_exact
    dtype = object if exact else float
    one = Fraction(1) if exact else 1.0
    if q == 0:
        return np.array(one, dtype=dtype)

    if isinstance(proc, IIDProcess):
        row = np.array(proc.probs, dtype=dtype)
        out = np.array([one], dtype=dtype)
        for _ in range(q):
            out = np.multiply.outer(out, row).reshape(-1)
        return out.reshape((n,) * q)

    if isinstance(proc, MarkovProcess):
        r = proc.order
        init = np.array(proc.initial, dtype=dtype).reshape((n,) * r)
        if q <= r:
            return init.sum(axis=tuple(range(q, r))) if q < r else init
        trans = np.array(proc.transition, dtype=dtype)
        flat = init.reshape(-1)
        for _ in range(q - r):
            flat = (flat.reshape(-1, n**r)[:, :, None] * trans[None, :, :]).reshape(-1)
        return flat.reshape((n,) * q)

    flat = np.array([one], dtype=dtype)
    for t in range(q):
        new = np.zeros((flat.shape[0], n), dtype=dtype)
        if exact:
            new[...] = Fraction(0)
        for h, ph in enumerate(flat):
            if ph == 0:
                continue
            hist0 = np.unravel_index(h, (n,) * t) if t else ()
            row = proc.conditional_row(tuple(int(x) for x in hist0))
            new[h] = [ph * v for v in row]
        flat = new.reshape(-1)
    return flat.reshape((n,) * q)


def check_stationarity(model: SourceModel, depth: int, shift_max: int, tol: float = PROB_TOL) -> bool:
    """True iff every length-``depth`` window has the same law at shifts ``0..shift_max``."""
    if depth < 1 or shift_max < 0:
        raise ValueError("depth must be >= 1 and shift_max >= 0")
    n = model.size
    base = joint_distribution(model, depth).reshape(-1)
    for k in range(1, shift_max + 1):
        shifted = joint_distribution(model, depth + k).reshape(n**k, n**depth).sum(axis=0)
        if any(abs(a - b) > tol for a, b in zip(base, shifted)):
            return False
    return True


def sample_sequence(model: SourceModel, q: int, rng: np.random.Generator) -> tuple:
    """Draw ``X_1..X_q`` (1-based)."""
    _check_depth(model, q)
    seq0: tuple = ()
    for _ in range(q):
        row = np.array(model.process.conditional_row(seq0), dtype=float)
        seq0 += (int(rng.choice(model.size, p=row / row.sum())),)
    return tuple(x + 1 for x in seq0)


def iter_sequences(n: int, q: int):
    """All 1-based sequences of length ``q`` in lexicographic order."""
    return itertools.product(range(1, n + 1), repeat=q)


def history_key(history: Sequence[int]) -> str:
    return ",".join(str(int(x)) for x in history)


def parse_history_key(key: str) -> tuple:
    if key == "":
        return ()
    try:
        return tuple(int(x) for x in key.split(","))
    except ValueError:
        raise SourceError(f"malformed history key {key!r}") from None


# ---------------------------------------------------------------------------
# JSON source files


_TOP_KEYS = {"dimension", "alphabet", "process"}
_PROCESS_KEYS = {
    "iid": {"type", "probs"},
    "markov": {"type", "order", "initial", "transition"},
    "table": {"type", "depth", "entries"},
}


def _parse_complex(pair, where: str) -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise SourceError(f"{where}: expected [re, im], got {pair!r}")
    re, im = pair
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
        raise SourceError(f"{where}: non-numeric amplitude {pair!r}")
    return complex(re, im)


def complex_to_json(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def parse_vector(data, where: str = "vector") -> np.ndarray:
    if not isinstance(data, list):
        raise SourceError(f"{where}: expected a list of [re, im] pairs")
    return np.array([_parse_complex(p, f"{where}[{i}]") for i, p in enumerate(data)], dtype=complex)


def parse_alphabet(data, dimension: int | None = None) -> StateAlphabet:
    if not isinstance(data, list) or not data:
        raise SourceError("alphabet must be a non-empty list of states")
    states = [parse_vector(s, f"alphabet[{i}]") for i, s in enumerate(data)]
    if dimension is not None and any(len(s) != dimension for s in states):
        raise SourceError(f"alphabet states must all have dimension {dimension}")
    if len({len(s) for s in states}) != 1:
        raise SourceError("alphabet states differ in dimension")
    return StateAlphabet(np.array(states))


def _parse_probs(data, where: str) -> tuple:
    if not isinstance(data, list):
        raise SourceError(f"{where}: expected a list of probabilities")
    return tuple(data)


def parse_process(data):
    if not isinstance(data, dict):
        raise SourceError("process must be an object")
    kind = data.get("type")
    if kind not in _PROCESS_KEYS:
        raise SourceError(f"process type must be one of {sorted(_PROCESS_KEYS)}, got {kind!r}")
    extra = set(data) - _PROCESS_KEYS[kind]
    missing = _PROCESS_KEYS[kind] - set(data)
    if extra:
        raise SourceError(f"unknown process keys: {sorted(extra)}")
    if missing:
        raise SourceError(f"missing process keys: {sorted(missing)}")
    if kind == "iid":
        return IIDProcess(_parse_probs(data["probs"], "probs"))
    if kind == "markov":
        if not isinstance(data["transition"], list):
            raise SourceError("transition must be a list of rows")
        rows = tuple(_parse_probs(r, f"transition[{i}]") for i, r in enumerate(data["transition"]))
        return MarkovProcess(data["order"], _parse_probs(data["initial"], "initial"), rows)
    entries = data["entries"]
    if not isinstance(entries, dict):
        raise SourceError("table entries must be an object keyed by history")
    parsed = {}
    for key, row in entries.items():
        hist = parse_history_key(key)
        if any(x < 1 for x in hist):
            raise SourceError(f"history key {key!r} must use 1-based indices")
        parsed[tuple(x - 1 for x in hist)] = _parse_probs(row, f"entries[{key!r}]")
    return HistoryTable(data["depth"], parsed)


def parse_source(data) -> SourceModel:
    if not isinstance(data, dict):
        raise SourceError("source must be a JSON object")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise SourceError(f"unknown source keys: {sorted(extra)}")
    missing = _TOP_KEYS - set(data)
    if missing:
        raise SourceError(f"missing source keys: {sorted(missing)}")
    dim = data["dimension"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SourceError(f"dimension must be a positive integer, got {dim!r}")
    alphabet = parse_alphabet(data["alphabet"], dim)
    return SourceModel(alphabet, parse_process(data["process"]))


def load_source(path: str | Path) -> SourceModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SourceError(f"cannot read source file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SourceError(f"invalid JSON in {path}: {exc}") from exc
    return parse_source(data)


def alphabet_to_json(alphabet: StateAlphabet) -> list:
    return [[complex_to_json(z) for z in s] for s in alphabet.states]


def source_to_json(model: SourceModel) -> dict:
    proc = model.process
    if isinstance(proc, IIDProcess):
        pdata = {"type": "iid", "probs": [float(p) for p in proc.probs]}
    elif isinstance(proc, MarkovProcess):
        pdata = {
            "type": "markov",
            "order": proc.order,
            "initial": [float(p) for p in proc.initial],
            "transition": [[float(p) for p in row] for row in proc.transition],
        }
    else:
        pdata = {
            "type": "table",
            "depth": proc.depth,
            "entries": {
                history_key(x + 1 for x in k): [float(p) for p in v] for k, v in sorted(proc.entries.items())
            },
        }
    return {"dimension": model.dimension, "alphabet": alphabet_to_json(model.alphabet), "process": pdata}


# ---------------------------------------------------------------------------
# random instances for property tests and experiments


def random_states(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    while True:
        states = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
        states /= np.linalg.norm(states, axis=1, keepdims=True)
        if np.linalg.matrix_rank(states, tol=1e-6) == d:
            return states


def random_source(
    rng: np.random.Generator,
    n: int,
    d: int = 2,
    kind: str = "iid",
    stationary: bool = False,
) -> SourceModel:
    """Random alphabet with Dirichlet-distributed probabilities.

    ``kind`` is ``"iid"`` or ``"markov"`` (order 1).  A Markov chain starts
    from a random initial law unless ``stationary`` is set.
    """
    alphabet = StateAlphabet(random_states(rng, n, d))
    if kind == "iid":
        return SourceModel(alphabet, IIDProcess(tuple(rng.dirichlet(np.ones(n)).tolist())))
    if kind == "markov":
        trans = rng.dirichlet(np.ones(n), size=n)
        if stationary:
            return SourceModel(alphabet, MarkovProcess.stationary(trans))
        init = rng.dirichlet(np.ones(n))
        return SourceModel(alphabet, MarkovProcess(1, tuple(init.tolist()), tuple(map(tuple, trans.tolist()))))
    raise ValueError(f"unknown source kind {kind!r}")
