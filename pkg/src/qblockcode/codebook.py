"""Prefix codebooks and the optimal adaptive / constrained block codes.

Every isometry of a block code maps its input basis vector ``e_i`` to the
computational-basis Fock state of the ``i``-th word of one shared prefix
code.  The optimal codes take the input bases to be eigenbases of the
relevant block states, with the shortest word on the largest eigenvalue.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ensemble import BlockEnsemble
from .errors import SourceError
from .fock import FockVector, is_prefix_free
from .kraft import LengthVector
from .source_model import (
    BlockConfig,
    SourceModel,
    StateAlphabet,
    alphabet_to_json,
    complex_to_json,
    history_key,
    parse_alphabet,
    parse_history_key,
    parse_vector,
)

GRAM_TOL = 1e-9
KINDS = ("adaptive", "constrained")


@dataclass(frozen=True)
class ClassicalCodebook:
    """Bit-string codewords; word ``i`` encodes basis vector ``i``."""

    words: tuple

    def __post_init__(self):
        words = tuple(self.words)
        for w in words:
            if not isinstance(w, str) or any(c not in "01" for c in w):
                raise ValueError(f"not a bit string: {w!r}")
        object.__setattr__(self, "words", words)

    def __len__(self) -> int:
        return len(self.words)

    @property
    def lengths(self) -> tuple:
        return tuple(len(w) for w in self.words)

    def is_prefix_free(self) -> bool:
        return is_prefix_free(self.words)

    def codewords(self) -> list:
        return [FockVector.basis(w, None) for w in self.words]


def canonical_prefix_code(lengths) -> ClassicalCodebook:
    """Canonical prefix code for Kraft-feasible lengths.

    >>> canonical_prefix_code((1, 2, 3, 3)).words
    ('0', '10', '110', '111')
    """
    lv = lengths if isinstance(lengths, LengthVector) else LengthVector(tuple(sorted(lengths)))
    ls = lv.lengths
    words = []
    for i, li in enumerate(ls):
        value = sum(1 << (li - lj) for lj in ls[:i])
        words.append(format(value, f"0{li}b") if li else "")
    return ClassicalCodebook(tuple(words))


@dataclass(frozen=True, eq=False)
class Isometry:
    """``U = sum_i |w_i><e_i|`` with the ``e_i`` the columns of ``basis``."""

    basis: np.ndarray
    codebook: ClassicalCodebook

    def __post_init__(self):
        basis = np.array(self.basis, dtype=complex)
        d = len(self.codebook)
        if basis.shape != (d, d):
            raise ValueError(f"basis shape {basis.shape} does not match {d} codewords")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return len(self.codebook)

    def coefficients(self, vector) -> np.ndarray:
        """``<e_i|vector>`` for every input basis vector."""
        return self.basis.conj().T @ np.asarray(vector, dtype=complex)

    def apply(self, vector) -> FockVector:
        coeffs = self.coefficients(vector)
        return FockVector(zip(self.codebook.words, coeffs), _trusted=True)

    def codewords(self) -> list:
        return self.codebook.codewords()


def verify_isometry(iso: Isometry, tol: float = GRAM_TOL) -> bool:
    """Orthonormal input basis and pairwise distinct codewords."""
    gram = iso.basis.conj().T @ iso.basis
    if np.max(np.abs(gram - np.eye(iso.dim))) > tol:
        return False
    return len(set(iso.codebook.words)) == iso.dim


class BlockCode:
    """Family of isometries sharing one codebook.

    Adaptive codes are keyed by the 1-based emission history preceding a
    block (``()`` for block 1); constrained codes by the 1-based block
    index.  Adaptive isometries built from a source are created on first
    request and cached.
    """

    def __init__(
        self,
        kind: str,
        cfg: BlockConfig,
        codebook: ClassicalCodebook,
        alphabet: StateAlphabet,
        isometries: dict | None = None,
        ensemble: BlockEnsemble | None = None,
        factory: Callable[[int, tuple], Isometry] | None = None,
    ):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
        if len(codebook) != cfg.codeword_dim(alphabet.dimension):
            raise ValueError(
                f"codebook has {len(codebook)} words but blocks have dimension {cfg.codeword_dim(alphabet.dimension)}"
            )
        self.kind = kind
        self.cfg = cfg
        self.codebook = codebook
        self.alphabet = alphabet
        self._isometries = dict(isometries or {})
        self._ensemble = ensemble
        self._factory = factory

    @property
    def block_size(self) -> int:
        return self.cfg.block_size

    @property
    def block_count(self) -> int:
        return self.cfg.block_count

    @property
    def dim(self) -> int:
        return len(self.codebook)

    def isometry_for(self, k: int, history=()) -> Isometry:
        """Isometry used for block ``k`` after the given 1-based history."""
        if not 1 <= k <= self.block_count:
            raise ValueError(f"block index {k} outside 1..{self.block_count}")
        if self.kind == "constrained":
            return self._isometries[k]
        history = tuple(int(x) for x in history)
        if len(history) != (k - 1) * self.block_size:
            raise SourceError(f"block {k} needs a history of length {(k - 1) * self.block_size}")
        if history not in self._isometries:
            if self._factory is None:
                raise SourceError(f"unknown history {history_key(history)!r}")
            self._isometries.setdefault(history, self._factory(k, history))
        return self._isometries[history]

    def isometries(self) -> dict:
        """Every isometry, materializing all positive-probability histories if needed."""
        if self.kind == "adaptive" and self._ensemble is not None:
            for k in range(1, self.block_count + 1):
                for hist, _ in self._ensemble.histories(k):
                    self.isometry_for(k, hist)
        return dict(self._isometries)

    def path(self, history) -> list:
        """The ``m`` isometries used for an emission sequence of length ``(m-1)*l`` or more."""
        l = self.block_size
        return [self.isometry_for(k, tuple(history[: (k - 1) * l])) for k in range(1, self.block_count + 1)]

    def to_json(self) -> dict:
        isos = self.isometries()
        if self.kind == "constrained":
            keyed = {str(k): isos[k] for k in sorted(isos)}
        else:
            keyed = {history_key(h): isos[h] for h in sorted(isos, key=lambda h: (len(h), h))}
        return {
            "kind": self.kind,
            "block_size": self.block_size,
            "block_count": self.block_count,
            "dimension": self.alphabet.dimension,
            "alphabet": alphabet_to_json(self.alphabet),
            "lengths": list(self.codebook.lengths),
            "words": list(self.codebook.words),
            "isometries": {
                key: [[complex_to_json(z) for z in iso.basis[:, i]] for i in range(iso.dim)]
                for key, iso in keyed.items()
            },
        }

    @classmethod
    def from_json(cls, data) -> "BlockCode":
        required = {"kind", "block_size", "block_count", "dimension", "alphabet", "lengths", "words", "isometries"}
        if not isinstance(data, dict):
            raise SourceError("codebook must be a JSON object")
        extra, missing = set(data) - required, required - set(data)
        if extra:
            raise SourceError(f"unknown codebook keys: {sorted(extra)}")
        if missing:
            raise SourceError(f"missing codebook keys: {sorted(missing)}")
        try:
            cfg = BlockConfig(data["block_size"], data["block_count"])
            codebook = ClassicalCodebook(tuple(data["words"]))
        except (TypeError, ValueError) as exc:
            raise SourceError(str(exc)) from exc
        if list(codebook.lengths) != list(data["lengths"]):
            raise SourceError("codebook lengths do not match its words")
        if not codebook.is_prefix_free():
            raise SourceError("codebook words are not prefix-free")
        alphabet = parse_alphabet(data["alphabet"], data["dimension"])
        kind = data["kind"]
        if kind not in KINDS:
            raise SourceError(f"kind must be one of {KINDS}, got {kind!r}")
        if not isinstance(data["isometries"], dict):
            raise SourceError("isometries must be an object")
        isos = {}
        for key, vecs in data["isometries"].items():
            if not isinstance(vecs, list):
                raise SourceError(f"isometry {key!r} must be a list of basis vectors")
            basis = np.column_stack([parse_vector(v, f"isometries[{key!r}]") for v in vecs]) if vecs else None
            try:
                iso = Isometry(basis, codebook)
            except ValueError as exc:
                raise SourceError(f"isometry {key!r}: {exc}") from exc
            if not verify_isometry(iso):
                raise SourceError(f"isometry {key!r} does not have an orthonormal input basis")
            if kind == "constrained":
                try:
                    isos[int(key)] = iso
                except ValueError:
                    raise SourceError(f"constrained isometry key {key!r} is not a block index") from None
            else:
                isos[parse_history_key(key)] = iso
        if kind == "constrained" and sorted(isos) != list(range(1, cfg.block_count + 1)):
            raise SourceError(f"constrained code needs isometries for blocks 1..{cfg.block_count}")
        if kind == "adaptive" and () not in isos:
            raise SourceError("adaptive code has no isometry for the first block")
        try:
            return cls(kind, cfg, codebook, alphabet, isos)
        except ValueError as exc:
            raise SourceError(str(exc)) from exc


def _check_lengths(model: SourceModel, cfg: BlockConfig, lengths) -> ClassicalCodebook:
    codebook = canonical_prefix_code(lengths)
    if len(codebook) != cfg.codeword_dim(model.dimension):
        raise ValueError(f"need {cfg.codeword_dim(model.dimension)} lengths, got {len(codebook)}")
    return codebook


def build_adaptive(
    model: SourceModel, cfg: BlockConfig, lengths, ensemble: BlockEnsemble | None = None
) -> BlockCode:
    """Optimal adaptive code for the given lengths: one eigenbasis per history."""
    codebook = _check_lengths(model, cfg, lengths)
    be = ensemble or BlockEnsemble(model, cfg)

    def factory(k: int, history: tuple) -> Isometry:
        return Isometry(be.conditional_spectrum(k, history).vectors, codebook)

    return BlockCode("adaptive", cfg, codebook, model.alphabet, ensemble=be, factory=factory)


def build_constrained(
    model: SourceModel, cfg: BlockConfig, lengths, ensemble: BlockEnsemble | None = None
) -> BlockCode:
    """Optimal constrained code for the given lengths: the eigenbasis of each block state."""
    codebook = _check_lengths(model, cfg, lengths)
    cfg.guard_histories(model.size)
    be = ensemble or BlockEnsemble(model, cfg)
    isos = {k: Isometry(be.block_spectrum(k).vectors, codebook) for k in range(1, cfg.block_count + 1)}
    return BlockCode("constrained", cfg, codebook, model.alphabet, isos, ensemble=be)
