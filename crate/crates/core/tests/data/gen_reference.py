"""Regenerates the high-precision reference tables used by the tests.

Run from this directory: python3 gen_reference.py
"""
import itertools
import mpmath as mp

mp.mp.dps = 50


def kl(x, y):
    x, y = mp.mpf(x), mp.mpf(y)
    return x * mp.log(x / y) + (1 - x) * mp.log((1 - x) / (1 - y))


def bounds(n, k, d, delta, gap, theta, sigma):
    n, k, d = mp.mpf(n), mp.mpf(k), mp.mpf(d)
    delta, gap, theta, sigma = map(mp.mpf, (delta, gap, theta, sigma))
    snr = sigma**2 / gap**2
    lb1 = snr * n * kl(1 - delta, delta / n)
    lb2 = snr * mp.sqrt(d * k * n / 72 * kl(mp.mpf(1) / 3 - 2 * delta, 4 * delta / n)) if delta < mp.mpf(1) / 6 else None
    ln_n = mp.log(n / delta)
    a = snr * (n * ln_n + mp.sqrt(d * n * k * ln_n) + mp.sqrt(d) * mp.log(k) / theta)
    ln_k = mp.log(k / delta)
    b = ln_k / theta + snr * ln_k / theta * (mp.sqrt(d) + mp.log(ln_n))
    return lb1, lb2, a, b


with open("theory_reference.csv", "w") as f:
    f.write("N,K,d,delta,Delta,theta,sigma,lb1,lb2,A,B\n")
    grid = itertools.product(
        [50, 200, 1000, 5000, 20000],
        [2, 10],
        [5, 500, 50000, 5000000, 500000000],
        [0.01, 0.1],
    )
    for i, (n, k, d, delta) in enumerate(grid):
        gap = [0.5, 1.0, 2.0][i % 3]
        sigma = [1.0, 0.5][i % 2]
        theta = 1.0 / k if i % 4 else 0.5 / k
        lb1, lb2, a, b = bounds(n, k, d, delta, gap, theta, sigma)
        row = [n, k, d, delta, gap, theta, sigma] + [mp.nstr(v, 30) if v is not None else "" for v in (lb1, lb2, a, b)]
        f.write(",".join(str(x) for x in row) + "\n")

with open("quantile_reference.csv", "w") as f:
    f.write("kind,param,p,quantile\n")
    for p in ["0.001", "0.01", "0.025", "0.1", "0.3", "0.5", "0.7", "0.9", "0.975", "0.99", "0.9999", "0.9999999", "1e-7", "0.999999", "0.6"]:
        q = mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1)
        f.write(f"normal,0,{p},{mp.nstr(q, 25)}\n")
    for dof, p in [(1, "0.95"), (1, "0.5"), (2, "0.9"), (3, "0.05"), (5, "0.99"), (10, "0.5"), (10, "0.999"),
                   (30, "0.1"), (50, "0.999"), (100, "0.975"), (500, "0.9999"), (1000, "0.99"),
                   (1000, "0.99999"), (4, "0.001"), (20, "0.9999999")]:
        # Bisection on the regularized lower incomplete gamma.
        lo, hi = mp.mpf(0), mp.mpf(dof) + 200 + 40 * mp.sqrt(dof)
        for _ in range(300):
            mid = (lo + hi) / 2
            if mp.gammainc(mp.mpf(dof) / 2, 0, mid / 2, regularized=True) < mp.mpf(p):
                lo = mid
            else:
                hi = mid
        f.write(f"chi2,{dof},{p},{mp.nstr((lo + hi) / 2, 25)}\n")

# Product of two independent standard normals: P(XY <= t) = 1/2 + (1/pi) int_0^t K0.
target = mp.mpf("0.975")
q = mp.findroot(lambda t: mp.mpf(1) / 2 + mp.quad(lambda z: mp.besselk(0, z), [0, t]) / mp.pi - target, 2.2)
print("product-normal 0.975 quantile", mp.nstr(q, 20), "density", mp.nstr(mp.besselk(0, q) / mp.pi, 20))

# Wilson 95% score intervals.
z = mp.sqrt(2) * mp.erfinv(mp.mpf("0.95"))
with open("wilson_reference.csv", "w") as f:
    f.write("successes,trials,lower,upper\n")
    pairs = [(k, n) for n in (1, 2, 5, 10, 20, 50, 100, 200, 1000, 12345) for k in sorted({0, 1, n // 3, n // 2, n - 1, n}) if 0 <= k <= n]
    for k, n in pairs[:50]:
        p = mp.mpf(k) / n
        denom = 1 + z**2 / n
        center = (p + z**2 / (2 * n)) / denom
        half = z * mp.sqrt(p * (1 - p) / n + z**2 / (4 * n * n)) / denom
        lo = mp.mpf(0) if k == 0 else center - half
        hi = mp.mpf(1) if k == n else center + half
        f.write(f"{k},{n},{mp.nstr(lo, 25)},{mp.nstr(hi, 25)}\n")
