"""Command-line interface: ils, ilc, codebook, encode, decode, entropy-profile, verify.

Exit codes: 0 success, 1 failed verification, 2 bad input, 3 enumeration
guard exceeded, 4 corrupted message.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path
from typing import Any

from .codebook import BlockCode, build_adaptive, build_constrained
from .codec import EncodedMessage, average_codeword_length, decode, encode
from .ensemble import BlockEnsemble
from .entropy import entropy_rate_profile, sandwich_check, write_profile_csv
from .errors import DecodeError, EnumerationGuardError, OracleMismatchError, SourceError
from .fock import check_unique_decodability, quantum_kraft_check
from .kraft import METHODS, adaptive_weights, constrained_weights, minimize
from .source_model import DEFAULT_MAX_ENUMERATION, BlockConfig, load_source

EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_GUARD = 3
EXIT_CORRUPT = 4

FIDELITY_TOL = 1e-9
EQUALITY_TOL = 1e-9
MAX_GRAM_TERMS = 4096
MAX_ROUND_TRIP = 10**4


def _sig(obj: Any, digits: int = 12) -> Any:
    """Round every float to ``digits`` significant digits."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: _sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sig(v, digits) for v in obj]
    return obj


def _dump(payload: Any, out: str | None) -> None:
    text = json.dumps(_sig(payload), indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SourceError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SourceError(f"invalid JSON in {path}: {exc}") from exc


def _config(args) -> BlockConfig:
    try:
        return BlockConfig(args.l, args.m, args.max_enumeration)
    except ValueError as exc:
        raise SourceError(str(exc)) from exc


def _optimum(args, kind: str) -> dict:
    model = load_source(args.source)
    cfg = _config(args)
    weights = adaptive_weights(model, cfg) if kind == "ils" else constrained_weights(model, cfg)
    opt = minimize(weights, args.method)
    return {
        "value": float(opt.value),
        "lengths": list(opt.lengths),
        "weights": [float(w) for w in weights.weights],
        "method": args.method,
    }


def cmd_ils(args) -> int:
    _dump(_optimum(args, "ils"), args.out)
    return 0


def cmd_ilc(args) -> int:
    _dump(_optimum(args, "ilc"), args.out)
    return 0


def cmd_codebook(args) -> int:
    model = load_source(args.source)
    cfg = _config(args)
    be = BlockEnsemble(model, cfg)
    if args.kind == "adaptive":
        lengths = minimize(adaptive_weights(model, cfg, be), args.method).lengths
        code = build_adaptive(model, cfg, lengths, be)
    else:
        lengths = minimize(constrained_weights(model, cfg, be), args.method).lengths
        code = build_constrained(model, cfg, lengths, be)
    _dump(code.to_json(), args.out)
    return 0


def _load_code(path: str) -> BlockCode:
    return BlockCode.from_json(_read_json(path))


def _parse_sequence(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x != "")
    except ValueError:
        raise SourceError(f"malformed sequence {text!r}; expected comma-separated integers") from None


def cmd_encode(args) -> int:
    code = _load_code(args.codebook)
    msg = encode(code, _parse_sequence(args.sequence))
    _dump(msg.to_json(), args.out)
    return 0


def cmd_decode(args) -> int:
    code = _load_code(args.codebook)
    msg = EncodedMessage.from_json(_read_json(args.message))
    try:
        result = decode(code, msg)
    except DecodeError as exc:
        _dump({"status": "corrupted", "residual_norm": exc.residual_norm, "error": str(exc)}, None)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    report = {
        "status": "ok",
        "fidelity": result.fidelity,
        "residual_norm": result.residual_norm,
        "sequence": list(msg.sequence),
        "codeword_parses": {bits: [i + 1 for i in idx] for bits, idx in sorted(result.parses.items())},
    }
    if not result.fidelity >= 1 - FIDELITY_TOL:
        report["status"] = "corrupted"
        _dump(report, args.out)
        print(f"error: decoded state has fidelity {result.fidelity:.12g} with the recorded sequence", file=sys.stderr)
        return EXIT_CORRUPT
    _dump(report, args.out)
    return 0


def cmd_entropy_profile(args) -> int:
    model = load_source(args.source)
    profile = entropy_rate_profile(model, args.l_max, args.max_enumeration)
    buf = io.StringIO()
    write_profile_csv(profile, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    if not profile.stationary:
        print("warning: source is not stationary; the entropy-rate limit is not asserted", file=sys.stderr)
    return 0


def _check(name: str, passed: bool | None, value: Any, tolerance: float | None, **extra) -> dict:
    status = "skipped" if passed is None else ("pass" if passed else "fail")
    return {"name": name, "status": status, "value": value, "tolerance": tolerance, **extra}


def run_verification(model, cfg: BlockConfig, method: str = "huffman") -> list:
    """Invariant checks for one source and block configuration."""
    be = BlockEnsemble(model, cfg)
    checks = []
    ils_opt = minimize(adaptive_weights(model, cfg, be), method)
    ilc_opt = minimize(constrained_weights(model, cfg, be), method)
    adaptive = build_adaptive(model, cfg, ils_opt.lengths, be)
    constrained = build_constrained(model, cfg, ilc_opt.lengths, be)

    for label, code in (("adaptive", adaptive), ("constrained", constrained)):
        total, ok = quantum_kraft_check(code.codebook.codewords())
        checks.append(_check(f"kraft_forward_{label}", ok, total, 1e-12))
        terms = code.dim**cfg.block_count
        if terms <= MAX_GRAM_TERMS:
            first_path = next(iter(be.histories(cfg.block_count)))[0]
            ok = check_unique_decodability(code.path(first_path), max_terms=MAX_GRAM_TERMS)
            checks.append(_check(f"unique_decodability_{label}", ok, terms, EQUALITY_TOL))
        else:
            checks.append(_check(f"unique_decodability_{label}", None, terms, EQUALITY_TOL, reason="D^m > 4096"))

    checks.append(
        _check(
            "ils_le_ilc",
            ils_opt.value <= ilc_opt.value + EQUALITY_TOL,
            {"ils": float(ils_opt.value), "ilc": float(ilc_opt.value)},
            EQUALITY_TOL,
        )
    )

    n_seq = model.size ** (cfg.block_size * cfg.block_count)
    for label, code, target in (("adaptive", adaptive, ils_opt.value), ("constrained", constrained, ilc_opt.value)):
        name = f"{label}_code_length_equals_{'ils' if label == 'adaptive' else 'ilc'}"
        if n_seq > cfg.max_enumeration:
            checks.append(_check(name, None, None, EQUALITY_TOL, reason="sequence enumeration exceeds limit"))
            continue
        length = average_codeword_length(code, model, cfg)
        checks.append(
            _check(name, abs(length - target) <= EQUALITY_TOL, {"code_length": length, "optimum": float(target)}, EQUALITY_TOL)
        )

    if n_seq <= MAX_ROUND_TRIP:
        from .source_model import iter_sequences, sequence_probability

        worst = 1.0
        for seq in iter_sequences(model.size, cfg.block_size * cfg.block_count):
            if sequence_probability(model, seq) <= 0:
                continue
            for code in (adaptive, constrained):
                worst = min(worst, decode(code, encode(code, seq)).fidelity)
        checks.append(_check("round_trip_fidelity", worst >= 1 - FIDELITY_TOL, worst, FIDELITY_TOL))
    else:
        checks.append(_check("round_trip_fidelity", None, None, FIDELITY_TOL, reason="too many sequences"))

    sw = sandwich_check(model, cfg.block_size, cfg.max_enumeration)
    checks.append(_check("sandwich_bounds", sw.ok, {"lower": sw.lower, "value": sw.value, "upper": sw.upper}, 1e-9))
    return checks


def cmd_verify(args) -> int:
    model = load_source(args.source)
    cfg = _config(args)
    try:
        checks = run_verification(model, cfg, args.method)
    except OracleMismatchError as exc:
        checks = [_check("oracle_equivalence", False, str(exc), 1e-9)]
    passed = all(c["status"] != "fail" for c in checks)
    _dump({"passed": passed, "checks": checks}, args.out)
    return 0 if passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qblockcode", description="Optimal lossless block coding of quantum sources")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True, blocks=True):
        if source:
            p.add_argument("--source", required=True, help="source specification JSON")
        if blocks:
            p.add_argument("-m", type=int, required=True, help="number of blocks")
            p.add_argument("-l", type=int, required=True, help="block size")
            p.add_argument("--method", choices=METHODS, default="huffman")
        p.add_argument("--max-enumeration", type=int, default=DEFAULT_MAX_ENUMERATION)
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("ils", help="optimal adaptive block coding cost")
    common(p)
    p.set_defaults(func=cmd_ils)
    p = sub.add_parser("ilc", help="optimal constrained block coding cost")
    common(p)
    p.set_defaults(func=cmd_ilc)
    p = sub.add_parser("codebook", help="build the optimal block code")
    common(p)
    p.add_argument("--kind", choices=("adaptive", "constrained"), required=True)
    p.set_defaults(func=cmd_codebook)
    p = sub.add_parser("encode", help="encode a 1-based symbol sequence")
    common(p, source=False, blocks=False)
    p.add_argument("--codebook", required=True)
    p.add_argument("--sequence", required=True, help="comma-separated 1-based symbols, e.g. 1,2,1,1")
    p.set_defaults(func=cmd_encode)
    p = sub.add_parser("decode", help="decode an encoded message")
    common(p, source=False, blocks=False)
    p.add_argument("--codebook", required=True)
    p.add_argument("--message", required=True)
    p.set_defaults(func=cmd_decode)
    p = sub.add_parser("entropy-profile", help="CSV of entropy and optimal cost per symbol")
    common(p, blocks=False)
    p.add_argument("--l-max", type=int, default=6)
    p.set_defaults(func=cmd_entropy_profile)
    p = sub.add_parser("verify", help="run the invariant checks")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnumerationGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (SourceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
