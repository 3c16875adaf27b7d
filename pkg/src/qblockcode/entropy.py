"""Von Neumann entropy and the entropy bounds on the constrained coding cost."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, TextIO

import numpy as np

from .ensemble import ensemble_state, spectrum
from .kraft import constrained_weights, minimize
from .source_model import DEFAULT_MAX_ENUMERATION, BlockConfig, SourceModel, check_stationarity

EIG_CUTOFF = 1e-12
BOUND_TOL = 1e-9


def von_neumann_entropy(rho) -> float:
    """``-sum lambda log2 lambda`` in bits."""
    lam = spectrum(rho).values
    lam = lam[lam > EIG_CUTOFF]
    return float(-np.sum(lam * np.log2(lam)))


class Sandwich(NamedTuple):
    lower: float
    value: float
    upper: float
    ok: bool


def sandwich_check(model: SourceModel, l: int, max_enumeration: int = DEFAULT_MAX_ENUMERATION) -> Sandwich:
    """``S(rho_l) <= ILC(1, l) <= S(rho_l) + 1``."""
    cfg = BlockConfig(l, 1, max_enumeration)
    s = von_neumann_entropy(ensemble_state(model, l, max_enumeration))
    value = minimize(constrained_weights(model, cfg)).value
    ok = s - BOUND_TOL <= value <= s + 1 + BOUND_TOL
    return Sandwich(s, float(value), s + 1, ok)


@dataclass(frozen=True)
class ProfileRow:
    l: int
    entropy_per_symbol: float
    ilc_per_symbol: float
    upper_envelope: float


@dataclass(frozen=True)
class EntropyProfile:
    rows: tuple
    stationary: bool


def entropy_rate_profile(
    model: SourceModel, l_max: int, max_enumeration: int = DEFAULT_MAX_ENUMERATION
) -> EntropyProfile:
    """Per-symbol entropy and optimal constrained cost for block sizes ``1..l_max``.

    The per-symbol cost converges to the entropy rate only for stationary
    sources; for other sources the rows are still computed but a
    :class:`UserWarning` is issued and ``stationary`` is False.
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    BlockConfig(l_max, 1, max_enumeration).guard(model.dimension**l_max, "block dimension")
    depth = l_max if model.max_depth is None else max(1, min(l_max, model.max_depth - 1))
    try:
        stationary = check_stationarity(model, depth, 1)
    except Exception:  # noqa: BLE001 - an unverifiable source is reported as non-stationary
        stationary = False
    if not stationary:
        warnings.warn("source is not stationary; the entropy-rate limit is not asserted", UserWarning, stacklevel=2)
    rows = []
    for l in range(1, l_max + 1):
        sw = sandwich_check(model, l, max_enumeration)
        rows.append(ProfileRow(l, sw.lower / l, sw.value / l, sw.upper / l))
    return EntropyProfile(tuple(rows), stationary)


def write_profile_csv(profile: EntropyProfile, fh: TextIO, digits: int = 12) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["l", "entropy_per_symbol", "ilc_per_symbol", "upper_envelope"])
    for r in profile.rows:
        writer.writerow([r.l] + [f"{x:.{digits}g}" for x in (r.entropy_per_symbol, r.ilc_per_symbol, r.upper_envelope)])


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)
