"""Compare fiber-assembled and coarea integrals of the standard test functions."""

import argparse

from clark_rif import corpus
from clark_rif.coarea import integrate_coarea, trace_level_set
from clark_rif.measure import assemble_polydisc
from clark_rif.selftest import ALPHAS, TEST_FUNCTIONS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--trace-points", type=int, default=2048)
    args = ap.parse_args()

    print(f"{'phi':<16} {'alpha':<14} {'f':<16} {'fiber':>26} {'abs diff':>10}")
    for name in ("z1", "z1z2", "rif11", "z1^2z2", "z1*blaschke(z2)"):
        phi = corpus.named(name)
        for alpha in ALPHAS:
            mu = assemble_polydisc(phi, alpha, args.grid)
            L = trace_level_set(phi, alpha, args.trace_points)
            for fname, f in TEST_FUNCTIONS.items():
                a, b = mu.integrate(f), integrate_coarea(L, f)
                print(f"{name:<16} {complex(alpha):<14.3f} {fname:<16} {a:>26.6f} {abs(a - b):10.2e}")


if __name__ == "__main__":
    main()
