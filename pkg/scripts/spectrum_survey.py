#!/usr/bin/env python3
"""Survey conjugation spectra across the fixtures.

Prints, for every ordered pair of invariant generators, the s-exponents and
multiplicities of the conjugation operator on the full generator module.
The observed exponent ranges bound the uniqueness-class growth rates seen in
practice; no a priori bound is asserted.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qhc.flag import SphericalAlgebra
from qhc.principal import conjugation_spectrum
from qhc.rootdata import CartanMatrix, build_root_datum, check_hermitian

FIXTURES = (("A", 1, 1), ("A", 2, 1), ("C", 2, 2), ("A", 3, 2))


def main():
    widest = 0
    for kind, rank, l0 in FIXTURES:
        pair = check_hermitian(
            build_root_datum(CartanMatrix.builtin(kind, rank)), l0 - 1)
        alg = SphericalAlgebra(pair, bound=2)
        D = alg.field.D
        print(f"{kind}{rank} (marked node {l0}, s^{D} = q):")
        for a, mu in enumerate(alg.generator_weights):
            for b in range(a, alg.rank):
                spec = conjugation_spectrum(alg, mu, b)
                pretty = ", ".join(f"s^{m}" + (f" x{k}" if k > 1 else "")
                                   for m, k in sorted(spec.items()))
                print(f"  module {mu} conjugated along generator {b + 1}: "
                      f"{pretty}")
                widest = max(widest, *(abs(m) for m in spec))
        print()
    print(f"largest |exponent| observed: {widest}")


if __name__ == "__main__":
    main()
