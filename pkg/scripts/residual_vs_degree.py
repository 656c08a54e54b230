"""Print the L^2(mu_alpha) distance from conj(zeta_1) to polynomials of degree N."""

import argparse

from clark_rif import corpus
from clark_rif.cli import parse_complex
from clark_rif.density import gram_residual, obstruction_detect
from clark_rif.measure import assemble_polydisc


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--phi", default="rif11", help="bivariate corpus name")
    ap.add_argument("--alpha", default="i")
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--max-degree", type=int, default=20)
    args = ap.parse_args()

    phi = corpus.named(args.phi)
    alpha = parse_complex(args.alpha)
    mu = assemble_polydisc(phi, alpha, args.grid)
    print(f"# {args.phi} alpha={alpha} verdict={obstruction_detect(phi, alpha).prediction}")
    print(f"{'N':>3} {'residual':>12} {'ratio':>8}")
    prev = None
    for N in range(1, args.max_degree + 1):
        r = gram_residual(mu, 0, N).residual
        ratio = f"{prev / r:8.3f}" if prev and r > 0 else ""
        print(f"{N:>3} {r:12.4e} {ratio}")
        prev = r


if __name__ == "__main__":
    main()
