"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line.  The module also runs
standalone: ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import itertools
import math
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import unitary_group

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import MARKOV_PARAMS, ORTHO, SCHUMACHER, make_iid, make_markov  # noqa: E402
import oracles  # noqa: E402
from qblockcode.codebook import Isometry, build_adaptive, build_constrained, canonical_prefix_code  # noqa: E402
from qblockcode.codec import EncodedMessage, average_codeword_length, decode, encode, encoded_length  # noqa: E402
from qblockcode.ensemble import BlockEnsemble, ensemble_state, spectrum  # noqa: E402
from qblockcode.entropy import sandwich_check  # noqa: E402
from qblockcode.errors import DecodeError  # noqa: E402
from qblockcode.fock import FockVector, check_unique_decodability, quantum_kraft_check  # noqa: E402
from qblockcode.kraft import (  # noqa: E402
    WeightProfile,
    adaptive_weights,
    constrained_weights,
    evaluate,
    minimize,
    optimal_lengths_bruteforce,
    optimal_lengths_huffman,
)
from qblockcode.source_model import BlockConfig, iter_sequences, random_source, sequence_probability  # noqa: E402

TOL = 1e-9
N_SOURCES = 60
CONFIGS = [(l, m) for l in (1, 2) for m in (1, 2)]


RESULTS: dict = {}


def report(number: int, title: str, ok: bool, detail: str) -> None:
    """Record and print one result line; conftest repeats them in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} -- {detail}"
    RESULTS[number] = line
    print(line)


def markov():
    return make_markov(ORTHO, **MARKOV_PARAMS)


def schumacher():
    return make_iid(SCHUMACHER, (0.5, 0.5))


@lru_cache(maxsize=1)
def random_instances():
    """``N_SOURCES`` random sources, half IID and half order-1 Markov, with ``N`` in {2, 3}."""
    rng = np.random.default_rng(1729)
    sources = []
    for i in range(N_SOURCES):
        kind = "iid" if i % 2 == 0 else "markov"
        n = 2 + (i // 2) % 2
        sources.append(random_source(rng, n, 2, kind))
    return tuple(sources)


@lru_cache(maxsize=1)
def instance_results():
    """Optimal values, lengths and built codes for every (source, l, m)."""
    out = []
    for model in random_instances():
        for l, m in CONFIGS:
            cfg = BlockConfig(l, m)
            be = BlockEnsemble(model, cfg)
            wa, wc = adaptive_weights(model, cfg, be), constrained_weights(model, cfg, be)
            sa, sc = minimize(wa), minimize(wc)
            out.append(
                {
                    "model": model,
                    "cfg": cfg,
                    "weights": (wa, wc),
                    "ils": sa,
                    "ilc": sc,
                    "adaptive": build_adaptive(model, cfg, sa.lengths, be),
                    "constrained": build_constrained(model, cfg, sc.lengths, be),
                }
            )
    return tuple(out)


def test_criterion_01_oracle_equivalence():
    t0 = time.perf_counter()
    worst_float, exact_mismatch, count = 0.0, 0, 0
    for inst in instance_results():
        for w in inst["weights"]:
            h = optimal_lengths_huffman(w)
            b = optimal_lengths_bruteforce(w)
            worst_float = max(worst_float, abs(evaluate(w, h) - evaluate(w, b)))
            ex = w.exact()
            if evaluate(ex, optimal_lengths_huffman(ex)) != evaluate(ex, optimal_lengths_bruteforce(ex)):
                exact_mismatch += 1
            count += 1
    elapsed = time.perf_counter() - t0
    ok = exact_mismatch == 0 and worst_float <= TOL and elapsed < 60 and len(random_instances()) >= 50
    report(
        1,
        "huffman == exhaustive search",
        ok,
        f"{len(random_instances())} sources, {count} profiles, exact mismatches {exact_mismatch}, "
        f"max float gap {worst_float:.2e}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_02_closed_form_consistency():
    worst, checked = 0.0, 0
    for inst in instance_results():
        model, cfg = inst["model"], inst["cfg"]
        if model.size ** (cfg.l * cfg.m) > 10**4:
            continue
        worst = max(worst, abs(average_codeword_length(inst["adaptive"], model) - inst["ils"].value))
        worst = max(worst, abs(average_codeword_length(inst["constrained"], model) - inst["ilc"].value))
        checked += 1
    ok = worst <= TOL and checked > 0
    report(2, "L(built code) == ILS / ILC", ok, f"{checked} instances, max deviation {worst:.2e}")
    assert ok


def test_criterion_03_schumacher_benchmark():
    model = schumacher()
    lam = spectrum(ensemble_state(model, 1)).values
    closed = np.array([(2 + math.sqrt(2)) / 4, (2 - math.sqrt(2)) / 4])
    eig_err = float(np.max(np.abs(lam - closed)))
    w = adaptive_weights(model, BlockConfig(2, 1))
    value = minimize(w, "both").value
    exhaustive, _ = oracles.min_cost(oracles.eigenvalues_desc(ensemble_state(model, 2)))
    ok = eig_err <= TOL and 1.4178 <= value <= 1.4180 and abs(value - exhaustive) <= TOL and value / 2 < 1
    report(
        3,
        "Schumacher source",
        ok,
        f"eigenvalue error {eig_err:.1e}, ILS(1,2) = {value:.6f} (oracle {exhaustive:.6f}), per symbol {value / 2:.6f}",
    )
    assert ok


def test_criterion_04_sandwich_bounds():
    t0 = time.perf_counter()
    failures = []
    for name, model in (("schumacher", schumacher()), ("markov", markov())):
        for l in range(1, 7):
            s = sandwich_check(model, l)
            if not s.ok:
                failures.append((name, l, s))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30
    report(4, "S <= ILC(1,l) <= S + 1", ok, f"l = 1..6 for 2 sources, failures {failures}, {elapsed:.1f}s")
    assert ok


def test_criterion_05_entropy_rate_envelope():
    model = schumacher()
    rows = []
    for l in range(1, 7):
        s = sandwich_check(model, l)
        rows.append((l, s.lower / l, s.value / l))
    inside = all(lo - TOL <= v <= lo + 1 / l + TOL for l, lo, v in rows)
    gap6 = rows[-1][2] - rows[-1][1]
    ok = inside and gap6 <= 1 / 6
    detail = ", ".join(f"l={l}: {v:.4f}" for l, _, v in rows)
    report(5, "ILC/l within [S/l, S/l + 1/l]", ok, f"{detail}; gap at l=6 = {gap6:.4f}")
    assert ok


def test_criterion_06_adaptive_dominance():
    violations = sum(inst["ils"].value > inst["ilc"].value + TOL for inst in instance_results())
    cfg = BlockConfig(2, 2)
    src = markov()
    s = minimize(adaptive_weights(src, cfg), "both", rational=True).value
    c = minimize(constrained_weights(src, cfg), "both", rational=True).value
    ok = violations == 0 and abs(s - 2.94) <= TOL and abs(c - 3.3) <= TOL and abs((c - s) - 0.36) <= TOL
    report(6, "ILS <= ILC", ok, f"{violations} violations; markov ILS {float(s):.9f}, ILC {float(c):.9f}, diff {float(c - s):.9f}")
    assert ok


def test_criterion_07_stationarity_identities():
    rng = np.random.default_rng(77)
    models = [markov()] + [random_source(rng, n, 2, "markov", stationary=True) for n in (2, 3, 2, 3)]
    worst_rho, worst_ilc = 0.0, 0.0
    for model in models:
        for l in (1, 2):
            be = BlockEnsemble(model, BlockConfig(l, 4))
            states = [be.block_state(k) for k in range(1, 5)]
            worst_rho = max(worst_rho, max(np.linalg.norm(a - b) for a, b in itertools.combinations(states, 2)))
            one = minimize(constrained_weights(model, BlockConfig(l, 1))).value
            for m in range(1, 5):
                worst_ilc = max(worst_ilc, abs(minimize(constrained_weights(model, BlockConfig(l, m))).value - m * one))
    ok = worst_rho <= TOL and worst_ilc <= TOL
    report(7, "stationary: rho^k = rho_l, ILC(m,l) = m ILC(1,l)", ok, f"max Frobenius {worst_rho:.1e}, max ILC gap {worst_ilc:.1e}")
    assert ok


def test_criterion_08_unique_decodability():
    codes = []
    for inst in instance_results():
        codes += [(inst["model"], inst["adaptive"]), (inst["model"], inst["constrained"])]
    for model, l, m in ((schumacher(), 3, 4), (markov(), 2, 6), (schumacher(), 6, 2), (markov(), 4, 3)):
        cfg = BlockConfig(l, m)
        for weights, build in ((adaptive_weights, build_adaptive), (constrained_weights, build_constrained)):
            codes.append((model, build(model, cfg, minimize(weights(model, cfg)).lengths)))
    checked, failures, kraft_bad = 0, 0, 0
    for model, code in codes:
        if code.dim**code.block_count > 4096:
            continue
        # the isometries along the most probable emission path
        q = code.block_size * (code.block_count - 1)
        history = max(iter_sequences(model.size, q), key=lambda s: sequence_probability(model, s)) if q else ()
        failures += not check_unique_decodability(code.path(history), max_terms=4096)
        kraft_bad += not quantum_kraft_check(code.codebook.codewords())[1]
        checked += 1
    ok = failures == 0 and kraft_bad == 0
    report(8, "Gram of concatenations == I, Kraft holds", ok, f"{checked} codes, {failures} Gram failures, {kraft_bad} Kraft failures")
    assert ok


def test_criterion_09_round_trip():
    worst, sequences, rejected, corrupted = 1.0, 0, 0, 0
    for inst in instance_results():
        model, cfg = inst["model"], inst["cfg"]
        if model.size ** (cfg.l * cfg.m) > 10**4:
            continue
        for code in (inst["adaptive"], inst["constrained"]):
            last = None
            for seq in iter_sequences(model.size, cfg.l * cfg.m):
                if sequence_probability(model, seq) <= 0:
                    continue
                last = encode(code, seq)
                worst = min(worst, decode(code, last).fidelity)
                sequences += 1
            amps = dict(last.state.items())
            junk = "1" * (max(code.codebook.lengths) * cfg.m + 1)
            amps[junk] = 1e-3
            corrupted += 1
            try:
                decode(code, EncodedMessage(FockVector(amps), last.sequence, last.block_keys))
            except DecodeError as exc:
                rejected += abs(exc.residual_norm - 1e-3) < 1e-12
    ok = 1 - worst <= TOL and rejected == corrupted
    report(9, "round-trip fidelity, corruption rejected", ok, f"{sequences} encodings, min fidelity {worst:.12f}, rejected {rejected}/{corrupted}")
    assert ok


def test_criterion_10_rearrangement_and_basis_optimality():
    rng = np.random.default_rng(4242)
    bad_perm = 0
    for _ in range(1000):
        d = int(rng.integers(2, 17))
        q = np.sort(rng.dirichlet(np.ones(d)))[::-1]
        prof = WeightProfile(tuple(q), float(q.sum()))
        lengths = optimal_lengths_huffman(WeightProfile(tuple(np.sort(rng.dirichlet(np.ones(d)))[::-1]), 1.0)).lengths
        perm = tuple(rng.permutation(lengths))
        bad_perm += evaluate(prof, lengths) > evaluate(prof, perm) + TOL
    bad_basis = 0
    for trial in range(100):
        model = random_source(rng, 3, 2, "iid" if trial % 2 else "markov")
        l = 1 + trial % 2
        rho = ensemble_state(model, l)
        spec = spectrum(rho)
        cb = canonical_prefix_code(minimize(WeightProfile(tuple(spec.values), 1.0)).lengths)
        best = encoded_length(Isometry(spec.vectors, cb), rho)
        w = unitary_group.rvs(len(rho), random_state=rng)
        bad_basis += encoded_length(Isometry(w @ spec.vectors, cb), rho) < best - TOL
    ok = bad_perm == 0 and bad_basis == 0
    report(10, "rearrangement and eigenbasis optimality", ok, f"{bad_perm}/1000 permutation violations, {bad_basis}/100 basis violations")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
