"""Independent 50-digit evaluation of the closed forms used as frozen test values.

Run: python3 tests/oracle/closed_form.py
"""
from mpmath import mp, mpf, sqrt, exp, log

mp.dps = 50


def roots(mu, s2, a):
    d = sqrt((mu / s2) ** 2 + 2 * a / s2)
    return -mu / s2 + d, -mu / s2 - d


def bisect(f, lo, hi):
    # f increasing with f(lo) < 0 < f(hi)
    for _ in range(400):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def b_star(r1, r2):
    return log(r2**2 / r1**2) / (r1 - r2)


def b_double_star(r1, r2, k):
    f = lambda b: r1 * exp(-r2 * b) - r2 * exp(-r1 * b) - k * (r1 - r2)
    return bisect(f, mpf(0), mpf(200))


def b_hat(r1, r2, k):
    f = lambda b: r1 * exp(r1 * b) - r2 * exp(r2 * b) - (r1 - r2) / k
    return bisect(f, b_star(r1, r2), mpf(200))


def h(r1, r2, b):
    return (r1 - r2) / (r1 * exp(r1 * b) - r2 * exp(r2 * b))


def G(r1, r2, x, b):
    if x > b:
        return x - b + G(r1, r2, b, b)
    return (exp(r1 * x) - exp(r2 * x)) / (r1 * exp(r1 * b) - r2 * exp(r2 * b))


def H(r1, r2, k, x, b):
    if x > b:
        return x - b + H(r1, r2, k, b, b)
    num = (1 - k * exp(r2 * b)) / r1 * exp(r1 * x) - (1 - k * exp(r1 * b)) / r2 * exp(r2 * x)
    return num / (exp(r1 * b) - exp(r2 * b))


def report(mu, s2, a, k):
    mu, s2, a, k = mpf(mu), mpf(s2), mpf(a), mpf(k)
    r1, r2 = roots(mu, s2, a)
    bs, bss = b_star(r1, r2), b_double_star(r1, r2, k)
    kc = h(r1, r2, bs)
    print(f"mu={mu} sigma2={s2} alpha={a} k={k}")
    for name, v in [("r1", r1), ("r2", r2), ("b_star", bs), ("b_double_star", bss), ("k_critical", kc)]:
        print(f"  {name:14s} {mp.nstr(v, 20)}")
    if k <= kc:
        print(f"  {'b_hat':14s} {mp.nstr(b_hat(r1, r2, k), 20)}")
    return r1, r2, bs, bss, k


if __name__ == "__main__":
    r1, r2, bs, bss, k = report("0.04", "0.15", "0.05", "1.01")
    for x, b in [(0.5, bss), (1, 1.4), (1, 2.4), (0, 1.4), (0, 2.4), (1, bss)]:
        x, b = mpf(x), mpf(b)
        print(f"  H({mp.nstr(x, 3)}; b={mp.nstr(b, 6)}) = {mp.nstr(H(r1, r2, k, x, b), 20)}")
    for x, b in [(1, 2.4), (1, 1.4), (0.5, bs), (2, bs)]:
        x, b = mpf(x), mpf(b)
        print(f"  G({mp.nstr(x, 3)}; b={mp.nstr(b, 6)}) = {mp.nstr(G(r1, r2, x, b), 20)}")
    print(f"  G(b*; b*) = {mp.nstr(G(r1, r2, bs, bs), 20)}")
    report("0.04", "0.15", "0.05", "1.3")
    # b** at the cost threshold
    kc = h(r1, r2, bs)
    print(f"  b** at k_critical - b* = {mp.nstr(b_double_star(r1, r2, kc) - bs, 5)}")
    report("0.3", "0.02", "0.4", "2.5")
    report("0.01", "0.9", "0.007", "1.05")
