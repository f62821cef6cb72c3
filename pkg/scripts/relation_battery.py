#!/usr/bin/env python3
"""Run the full principal series relation batteries with timing.

Builds each fixture's representation to its standard depth, verifies every
defining relation on every prepared basis vector, and sweeps the integer
specializations against the direct localized action.
"""

import argparse
import itertools
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qhc.flag import SphericalAlgebra
from qhc.principal import (build_degenerate_series,
                           build_nondegenerate_series,
                           integer_specialization, verify_dj_relations)
from qhc.rootdata import CartanMatrix, build_root_datum, check_hermitian

BATTERIES = (
    ("A", 1, 1, 1, 6),
    ("A", 2, 1, 1, 2),
    ("C", 2, 2, 1, 2),
    ("C", 2, 2, 2, 2),
    ("A", 3, 2, None, 2),
)


def words_for(pair):
    out = []
    for i in range(pair.datum.rank):
        out.append((("E", i),))
        out.append((("F", i),))
    out.append((("E", pair.l0), ("F", pair.l0)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sweep", type=int, default=2,
                    help="specialize at integer exponents with |u_k| <= this")
    args = ap.parse_args()

    for kind, rank, l0, k, level in BATTERIES:
        tag = f"{kind}{rank}" + (f" k={k}" if k else " all directions")
        pair = check_hermitian(
            build_root_datum(CartanMatrix.builtin(kind, rank)), l0 - 1)
        t0 = time.perf_counter()
        alg = SphericalAlgebra(pair, bound=2)
        rep = (build_degenerate_series(alg, k - 1, level) if k
               else build_nondegenerate_series(alg, bound=level))
        built = time.perf_counter() - t0

        t0 = time.perf_counter()
        report = verify_dj_relations(rep)
        relations = time.perf_counter() - t0

        t0 = time.perf_counter()
        checked = skipped = 0
        sweep = range(-args.sweep, args.sweep + 1)
        for u0 in itertools.product(sweep, repeat=rep.nparams):
            for oc in integer_specialization(rep, u0, words_for(pair)):
                if oc.checked:
                    checked += 1
                else:
                    skipped += 1
        sp = time.perf_counter() - t0

        print(f"{tag}: build {built:.1f}s; relations {report.checked} states "
              f"({report.skipped} beyond prepared levels) in {relations:.1f}s;"
              f" specializations {checked} ({skipped} skipped) in {sp:.1f}s")


if __name__ == "__main__":
    main()
