"""Encoding and decoding of ``m*l``-symbol emissions with a block code.

The decoder projects onto the span of the ``m``-fold codeword
concatenations, which it finds by parsing each basis string of the message
with the prefix code.  For adaptive codes it needs the history used for each
block; the message carries those keys rather than the decoder trying to
discriminate non-orthogonal states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import BlockCode, ClassicalCodebook, Isometry
from .ensemble import spectrum
from .errors import DecodeError, SourceError
from .fock import COMPARE_TOL, FockVector, concat, length_expectation
from .source_model import (
    BlockConfig,
    SourceModel,
    StateAlphabet,
    history_key,
    joint_distribution,
    parse_history_key,
    sample_sequence,
)


@dataclass(frozen=True)
class EncodedMessage:
    state: FockVector
    sequence: tuple
    block_keys: tuple

    def to_json(self) -> dict:
        return {"state": self.state.to_json(), "sequence": list(self.sequence), "block_keys": list(self.block_keys)}

    @classmethod
    def from_json(cls, data) -> "EncodedMessage":
        if not isinstance(data, dict) or set(data) != {"state", "sequence", "block_keys"}:
            raise SourceError("message must have exactly the keys state, sequence, block_keys")
        try:
            state = FockVector.from_json(data["state"], max_bits=None)
        except ValueError as exc:
            raise SourceError(str(exc)) from exc
        seq, keys = data["sequence"], data["block_keys"]
        if not isinstance(seq, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in seq):
            raise SourceError("sequence must be a list of integers")
        if not isinstance(keys, list) or not all(isinstance(k, str) for k in keys):
            raise SourceError("block_keys must be a list of strings")
        return cls(state, tuple(seq), tuple(keys))


@dataclass(frozen=True)
class Decoded:
    state: np.ndarray
    residual_norm: float
    fidelity: float
    parses: dict


def _check_sequence(code: BlockCode, seq, alphabet: StateAlphabet) -> tuple:
    seq = tuple(seq)
    expected = code.block_size * code.block_count
    if len(seq) != expected:
        raise SourceError(f"sequence must have {expected} symbols, got {len(seq)}")
    for x in seq:
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)) or not 1 <= x <= alphabet.size:
            raise SourceError(f"symbol index {x!r} outside 1..{alphabet.size}")
    return tuple(int(x) for x in seq)


def encode(code: BlockCode, seq, alphabet: StateAlphabet | None = None) -> EncodedMessage:
    """Encode the product state of a 1-based emission sequence."""
    alphabet = alphabet or code.alphabet
    seq = _check_sequence(code, seq, alphabet)
    l = code.block_size
    pieces, keys = [], []
    for k in range(1, code.block_count + 1):
        history = seq[: (k - 1) * l]
        iso = code.isometry_for(k, history)
        block = alphabet.product_state([x - 1 for x in seq[(k - 1) * l : k * l]])
        pieces.append(iso.apply(block))
        keys.append(history_key(history))
    state = concat(*pieces)
    if abs(state.norm() - 1.0) > COMPARE_TOL:
        raise ValueError(f"encoded state has norm {state.norm()!r}; the code is not uniquely decodable")
    return EncodedMessage(state, seq, tuple(keys))


def encode_vector(code: BlockCode, vector) -> FockVector:
    """Encode an arbitrary vector of ``C^(D^m)`` by linearity (constrained codes, or ``m = 1``)."""
    if code.kind == "adaptive" and code.block_count > 1:
        raise ValueError("superposition inputs need a history-independent code")
    d, m = code.dim, code.block_count
    vec = np.asarray(vector, dtype=complex)
    if vec.shape != (d**m,):
        raise ValueError(f"expected a vector of dimension {d**m}")
    coeffs = vec.reshape((d,) * m)
    words = []
    for k in range(1, m + 1):
        iso = code.isometry_for(k, ())
        coeffs = np.moveaxis(np.tensordot(iso.basis.conj().T, coeffs, axes=([1], [k - 1])), 0, k - 1)
        words.append(iso.codebook.words)
    amps = {}
    for idx in zip(*np.nonzero(np.abs(coeffs) >= 1e-15)):
        amps["".join(words[k][i] for k, i in enumerate(idx))] = coeffs[idx]
    state = FockVector(amps, _trusted=True)
    if abs(state.norm() - np.linalg.norm(vec)) > COMPARE_TOL:
        raise ValueError("encoding did not preserve the norm")
    return state


def parse_codewords(codebook: ClassicalCodebook, bits: str, m: int) -> tuple | None:
    """Split ``bits`` into exactly ``m`` codewords of a prefix code (0-based indices), or ``None``."""
    lookup = {w: i for i, w in enumerate(codebook.words)}
    out = []
    pos = 0
    for _ in range(m):
        for end in range(pos, len(bits) + 1):
            hit = lookup.get(bits[pos:end])
            if hit is not None:
                out.append(hit)
                pos = end
                break
        else:
            return None
    return tuple(out) if pos == len(bits) else None


def _decode_isometries(code: BlockCode, msg: EncodedMessage) -> list:
    if len(msg.block_keys) != code.block_count:
        raise SourceError(f"message has {len(msg.block_keys)} block keys, code has {code.block_count} blocks")
    isos = []
    for k, key in enumerate(msg.block_keys, start=1):
        history = parse_history_key(key)
        if history != tuple(msg.sequence[: (k - 1) * code.block_size]):
            raise SourceError(f"block key {key!r} is inconsistent with the message sequence")
        isos.append(code.isometry_for(k, history))
    return isos


def decode(code: BlockCode, msg: EncodedMessage, tol: float = COMPARE_TOL) -> Decoded:
    """Invert the concatenated isometry on the codeword span.

    Raises :class:`DecodeError` when more than ``tol`` of the norm lies on
    strings that do not parse into ``m`` codewords.
    """
    if not code.codebook.is_prefix_free():
        raise ValueError("decoding requires a prefix-free codebook")
    isos: list[Isometry] = _decode_isometries(code, msg)
    d, m = code.dim, code.block_count
    amps = np.zeros((d,) * m, dtype=complex)
    residual_sq = 0.0
    parses = {}
    for bits, a in msg.state.items():
        idx = parse_codewords(code.codebook, bits, m)
        if idx is None:
            residual_sq += abs(a) ** 2
        else:
            amps[idx] += a
            parses[bits] = idx
    residual = math.sqrt(residual_sq)
    if residual > tol:
        raise DecodeError(residual)
    state = amps
    for k, iso in enumerate(isos):
        state = np.moveaxis(np.tensordot(iso.basis, state, axes=([1], [k])), 0, k)
    state = state.reshape(-1)
    target = code.alphabet.product_state([x - 1 for x in msg.sequence]) if msg.sequence else None
    fidelity = float(abs(np.vdot(target, state)) ** 2) if target is not None else float("nan")
    return Decoded(state, residual, fidelity, parses)


def encoded_length(iso: Isometry, rho) -> float:
    """``Tr(U rho U^dagger Lambda)`` computed from the encoded eigenvectors of ``rho``."""
    spec = spectrum(rho)
    mix = [(iso.apply(spec.vectors[:, j]), lam) for j, lam in enumerate(spec.values) if lam > 0]
    total = sum(p for _, p in mix)
    return length_expectation([(v, p / total) for v, p in mix])


def average_codeword_length(code: BlockCode, model: SourceModel, cfg: BlockConfig | None = None) -> float:
    """Exact expected length of the encoded message over all emission sequences."""
    cfg = cfg or code.cfg
    q = cfg.block_size * cfg.block_count
    cfg.guard(model.size**q, "sequence enumeration")
    probs = joint_distribution(model, q).reshape(-1)
    terms = []
    for flat, p in enumerate(probs):
        if p <= 0:
            continue
        seq = tuple(int(x) + 1 for x in np.unravel_index(flat, (model.size,) * q))
        terms.append(float(p) * length_expectation(encode(code, seq, model.alphabet).state))
    return math.fsum(terms)


def estimate_average_codeword_length(
    code: BlockCode, model: SourceModel, samples: int, rng: np.random.Generator
) -> tuple:
    """Monte Carlo estimate ``(mean, standard error)`` for sources too large to enumerate."""
    q = code.block_size * code.block_count
    values = np.array(
        [length_expectation(encode(code, sample_sequence(model, q, rng), model.alphabet).state) for _ in range(samples)]
    )
    stderr = values.std(ddof=1) / math.sqrt(samples) if samples > 1 else float("nan")
    return float(values.mean()), float(stderr)
