"""Cutoff bundles of the crossing and six-dimensional families: ranks, witnesses and gluing residuals."""
import argparse
from fractions import Fraction

from cliffko.indexsim import (crossing_family, cutoff_bundle, index_cocycle, numeric_gluing_residuals,
                              six_dim_family, spectral_cover, validate_index_cocycle)

FAMILIES = {
    "crossing": (crossing_family, ["1/2", "2"]),
    "six": (six_dim_family, ["1/4", "1", "9/4"]),
}


def describe(name: str, lams: list[Fraction]):
    build, _ = FAMILIES[name]
    fam = build()
    print(f"{fam.name} on {tuple(map(str, fam.interval))}, fiber dimension {fam.dim}")
    for reg in spectral_cover(fam, lams):
        ranks = [(f"({float(lo):+.3f}, {float(hi):+.3f})", b.rank)
                 for (lo, hi), b in zip(reg.intervals, cutoff_bundle(fam, reg.lam, reg))]
        print(f"  cutoff {reg.lam}: " + ", ".join(f"{iv} rank {r}" for iv, r in ranks))
    ic = index_cocycle(fam, lams)
    worst = 0.0
    for sigma, tau, c in ic.bundle.pairs():
        lam_s = max(ic.lams[i] for i in sigma)
        lam_t = max(ic.lams[i] for i in tau)
        lo, hi = ic.bundle.cover.components(tau)[c][0][0]
        worst = max(worst, *numeric_gluing_residuals(fam, lam_s, lam_t, (lo, hi)).values())
    rep = validate_index_cocycle(ic)
    print(f"  worst gluing residual {worst:.2e}; cocycle checks {'pass' if rep.passed else 'FAIL'}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("family", choices=sorted(FAMILIES), nargs="?", default="crossing")
    ap.add_argument("--cutoffs", nargs="*", help="cutoff values as fractions")
    args = ap.parse_args()
    lams = [Fraction(x) for x in (args.cutoffs or FAMILIES[args.family][1])]
    describe(args.family, lams)


if __name__ == "__main__":
    main()
