"""Regenerates src/welch_cases.rs: Welch t-test reference values at 50 significant digits.

    python3 scripts/welch_oracle.py > src/welch_cases.rs
"""
import random

import mpmath as mp

mp.mp.dps = 50


def welch(a, b):
    a = [mp.mpf(x) for x in a]
    b = [mp.mpf(x) for x in b]
    na, nb = len(a), len(b)
    ma, mb = mp.fsum(a) / na, mp.fsum(b) / nb
    va = mp.fsum((x - ma) ** 2 for x in a) / (na - 1)
    vb = mp.fsum((x - mb) ** 2 for x in b) / (nb - 1)
    sa, sb = va / na, vb / nb
    t = (ma - mb) / mp.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa ** 2 / (na - 1) + sb ** 2 / (nb - 1))
    # two-sided tail of Student's t through the regularized incomplete beta function
    p = mp.betainc(df / 2, mp.mpf(1) / 2, 0, df / (df + t * t), regularized=True)
    return t, df, p


def cases():
    yield [0.5, 0.6, 0.7], [0.8, 0.9, 1.0]
    yield [0.98, 0.99, 0.97, 1.0], [0.95, 0.96, 0.99, 0.97, 0.94]
    rng = random.Random(20240611)
    while True:
        na, nb = rng.randint(2, 40), rng.randint(2, 40)
        mu_a = rng.uniform(0.6, 1.0)
        mu_b = mu_a + rng.choice([0.0, 0.005, 0.02, 0.1, -0.05])
        sd_a, sd_b = rng.uniform(0.005, 0.1), rng.uniform(0.005, 0.1)
        a = [round(min(1.0, max(0.0, rng.gauss(mu_a, sd_a))), 4) for _ in range(na)]
        b = [round(min(1.0, max(0.0, rng.gauss(mu_b, sd_b))), 4) for _ in range(nb)]
        if len(set(a)) > 1 and len(set(b)) > 1:
            yield a, b


def rust(values):
    return "&[" + ", ".join(repr(float(v)) for v in values) + "]"


def main():
    print("// Generated by scripts/welch_oracle.py; do not edit.")
    print()
    print("/// `(a, b, t, df, p)` with two-sided p.")
    print("pub const WELCH_CASES: &[(&[f64], &[f64], f64, f64, f64)] = &[")
    for k, (a, b) in enumerate(cases()):
        if k == 20:
            break
        t, df, p = welch(a, b)
        print(f"    ({rust(a)}, {rust(b)}, {mp.nstr(t, 20)}, {mp.nstr(df, 20)}, {mp.nstr(p, 20)}),")
    print("];")


if __name__ == "__main__":
    main()
