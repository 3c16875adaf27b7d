"""Per-symbol entropy versus optimal constrained cost for growing block sizes.

    python scripts/entropy_envelope.py --source sources/schumacher.json --l-max 8
"""
import argparse
import sys

from qblockcode.entropy import entropy_rate_profile, write_profile_csv
from qblockcode.source_model import load_source


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--source", default="sources/schumacher.json")
    ap.add_argument("--l-max", type=int, default=8)
    args = ap.parse_args(argv)
    profile = entropy_rate_profile(load_source(args.source), args.l_max)
    write_profile_csv(profile, sys.stdout)
    last = profile.rows[-1]
    gap = last.ilc_per_symbol - last.entropy_per_symbol
    print(f"# gap at l={last.l}: {gap:.6f} (bound 1/l = {1 / last.l:.6f})", file=sys.stderr)


if __name__ == "__main__":
    main()
