"""Optimal lossless block coding of quantum stochastic sources."""
from .codebook import BlockCode, ClassicalCodebook, Isometry, build_adaptive, build_constrained, canonical_prefix_code
from .codec import Decoded, EncodedMessage, average_codeword_length, decode, encode, encoded_length
from .ensemble import BlockEnsemble, Spectrum, block_conditional_state, block_ensemble_state, ensemble_state, spectrum
from .entropy import entropy_rate_profile, sandwich_check, von_neumann_entropy
from .errors import (
    DecodeError,
    DensityMatrixError,
    EnumerationGuardError,
    OracleMismatchError,
    SourceError,
    UndefinedConditionalError,
)
from .fock import FockVector, check_unique_decodability, concat, inner, length_expectation, quantum_kraft_check
from .kraft import LengthVector, Optimum, WeightProfile, adaptive_weights, constrained_weights, ilc, ils, minimize
from .source_model import (
    BlockConfig,
    HistoryTable,
    IIDProcess,
    MarkovProcess,
    SourceModel,
    StateAlphabet,
    load_source,
    parse_source,
)

__all__ = [
    "BlockCode",
    "ClassicalCodebook",
    "Isometry",
    "build_adaptive",
    "build_constrained",
    "canonical_prefix_code",
    "Decoded",
    "EncodedMessage",
    "average_codeword_length",
    "decode",
    "encode",
    "encoded_length",
    "BlockEnsemble",
    "Spectrum",
    "block_conditional_state",
    "block_ensemble_state",
    "ensemble_state",
    "spectrum",
    "entropy_rate_profile",
    "sandwich_check",
    "von_neumann_entropy",
    "DecodeError",
    "DensityMatrixError",
    "EnumerationGuardError",
    "OracleMismatchError",
    "SourceError",
    "UndefinedConditionalError",
    "FockVector",
    "check_unique_decodability",
    "concat",
    "inner",
    "length_expectation",
    "quantum_kraft_check",
    "LengthVector",
    "Optimum",
    "WeightProfile",
    "adaptive_weights",
    "constrained_weights",
    "ilc",
    "ils",
    "minimize",
    "BlockConfig",
    "HistoryTable",
    "IIDProcess",
    "MarkovProcess",
    "SourceModel",
    "StateAlphabet",
    "load_source",
    "parse_source",
]
