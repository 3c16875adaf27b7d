"""How much adaptivity saves: ILC - ILS for symmetric two-state Markov sources.

Sweeps the probability of repeating the previous symbol for an orthonormal
or non-orthogonal qubit alphabet and prints a CSV.
"""
import argparse
import math

import numpy as np

from qblockcode.kraft import ilc, ils
from qblockcode.source_model import BlockConfig, MarkovProcess, SourceModel, StateAlphabet


def alphabet(overlap_angle: float) -> StateAlphabet:
    return StateAlphabet(np.array([[1, 0], [math.cos(overlap_angle), math.sin(overlap_angle)]], dtype=complex))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-l", type=int, default=2)
    ap.add_argument("-m", type=int, default=2)
    ap.add_argument("--angle", type=float, default=math.pi / 2, help="angle between the two states (pi/2 = orthogonal)")
    ap.add_argument("--steps", type=int, default=11)
    args = ap.parse_args(argv)
    cfg = BlockConfig(args.l, args.m)
    print("stay,ils,ilc,gap")
    for stay in np.linspace(0.5, 0.99, args.steps):
        trans = np.array([[stay, 1 - stay], [1 - stay, stay]])
        model = SourceModel(alphabet(args.angle), MarkovProcess.stationary(trans))
        s, c = ils(model, cfg).value, ilc(model, cfg).value
        print(f"{stay:.4f},{s:.9f},{c:.9f},{c - s:.9f}")


if __name__ == "__main__":
    main()
