"""Exact-rational reference values for Wigner 3-j and 6-j symbols.

Uses sympy's exact evaluation (radicals), rounded to 25 significant digits.
Writes tab-separated fixtures consumed by the core crate's tests.
"""
import random
import sys

from sympy import Rational, N
from sympy.physics.wigner import wigner_3j, wigner_6j


def half(t):
    return Rational(t, 2)


def fmt(t):
    return str(t)  # twice-values


def valid_pair(tj, tm):
    return abs(tm) <= tj and (tj - tm) % 2 == 0


def main(out_dir, seed=20261016):
    rng = random.Random(seed)
    rows = []
    fixed = [
        (2, 2, 2, 2, 2, 2),
        (2, 2, 0, 0, 0, 0),
        (4, 2, 6, -4, 2, 2),
    ]
    cases = list(fixed)
    while len(cases) < 400:
        tj1, tj2 = rng.randint(0, 10), rng.randint(0, 10)
        lo, hi = abs(tj1 - tj2), tj1 + tj2
        tj3 = rng.randrange(lo, hi + 1, 2) if rng.random() < 0.9 else rng.randint(0, 10)
        tm1 = rng.randrange(-tj1, tj1 + 1, 2)
        tm2 = rng.randrange(-tj2, tj2 + 1, 2)
        tm3 = -tm1 - tm2 if rng.random() < 0.9 else rng.randrange(-tj3, tj3 + 1, 2)
        if not valid_pair(tj3, tm3):
            continue
        cases.append((tj1, tj2, tj3, tm1, tm2, tm3))
    with open(f"{out_dir}/wigner_3j.tsv", "w") as f:
        f.write("# 2j1 2j2 2j3 2m1 2m2 2m3 value(25 digits) exact_zero\n")
        for c in cases:
            try:
                v = wigner_3j(*[half(x) for x in c])
            except ValueError:
                v = Rational(0)
            f.write("\t".join(map(str, c)) + f"\t{N(v, 25)}\t{int(v == 0)}\n")

    fixed6 = [
        (1, 1, 4, 1, 1, 0),
        (1, 3, 2, 6, 4, 3),
        (2, 2, 2, 2, 2, 2),
        (1, 3, 2, 4, 6, 7),
        (1, 3, 2, 8, 10, 7),
    ]
    cases6 = list(fixed6)
    while len(cases6) < 300:
        c = tuple(rng.randint(0, 10) for _ in range(6))
        # bias toward triangle-valid
        if len(cases6) % 5 != 0:
            ok = True
            for a, b, cc in ((0, 1, 2), (0, 4, 5), (3, 1, 5), (3, 4, 2)):
                x, y, z = c[a], c[b], c[cc]
                if not (abs(x - y) <= z <= x + y and (x + y + z) % 2 == 0):
                    ok = False
            if not ok:
                continue
        cases6.append(c)
    with open(f"{out_dir}/wigner_6j.tsv", "w") as f:
        f.write("# 2j1 2j2 2j3 2j4 2j5 2j6 value(25 digits) exact_zero\n")
        for c in cases6:
            try:
                v = wigner_6j(*[half(x) for x in c])
            except ValueError:
                # sympy rejects triangle violations instead of returning zero
                v = Rational(0)
            f.write("\t".join(map(str, c)) + f"\t{N(v, 25)}\t{int(v == 0)}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
