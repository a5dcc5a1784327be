"""Write level11.json: q-expansion of the weight-2 newform of level 11,
computed as the eta product q * prod (1 - q^n)^2 (1 - q^{11n})^2."""

import argparse
import json

import numpy as np


def eta_product(d):
    c = np.zeros(d + 1, dtype=np.int64)
    c[1] = 1
    for n in range(1, d + 1):
        for step in (n, n, 11 * n, 11 * n):
            if step > d:
                continue
            # multiply by (1 - q^step) in place, high degrees first
            c[step:] -= c[:-step].copy()
    return c


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--terms", type=int, default=20000)
    ap.add_argument("--out", default="level11.json")
    args = ap.parse_args()
    c = eta_product(args.terms)
    # known values of 11a
    assert [int(x) for x in c[1:14]] == [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4]
    rec = {
        "level": 11,
        "weight": 2,
        "nebentypus": {"modulus": 1, "values": []},
        "coeff_field_degree": 1,
        "atkin_lehner": -1,
        "coefficients": [[n, int(c[n])] for n in range(1, args.terms + 1)],
    }
    with open(args.out, "w") as fh:
        json.dump(rec, fh, separators=(",", ":"))
        fh.write("\n")


if __name__ == "__main__":
    main()
