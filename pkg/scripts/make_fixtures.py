"""Write the named fixture problems to data/*.json."""

import argparse
from pathlib import Path

from hypersolve.polynomials import PolynomialSpec
from hypersolve.problems import HyperbolicProgram, fixtures, save


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parent.parent / "data", type=Path)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, hp in fixtures().items():
        save(hp, args.out / f"{name}.json")
        print(args.out / f"{name}.json")
    # x1^2 + x2^2 has p(1, 0) > 0 but complex roots along (1, 0)
    bad = HyperbolicProgram(
        [[1.0, 1.0]], [1.0], [1.0, 0.0],
        PolynomialSpec("sparse-monomial", terms=((1.0, (2, 0)), (1.0, (0, 2))), direction=(1.0, 0.0)),
        [0.5, 0.5],
    )
    save(bad, args.out / "nonhyperbolic.json")
    print(args.out / "nonhyperbolic.json")


if __name__ == "__main__":
    main()
