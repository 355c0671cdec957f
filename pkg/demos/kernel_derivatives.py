"""
Derivatives of the squared exponential kernel
==============================================

Covariances between derivative observations come from mixed partial
derivatives of the kernel. They are evaluated in closed form with Hermite
polynomials; here we compare a few of them with finite differences.
"""

from math import comb

from agrf import HermiteTable, SquaredExponentialKernel, kernel_derivative

# the first few probabilists' Hermite polynomials, lowest power first
table = HermiteTable(4)
for m in range(5):
    print(f"He_{m}:", table.polynomial(m))

# a kernel with amplitude 1.5 and length scale 0.4
k = SquaredExponentialKernel(1.5, 0.4)
x, xp = 0.3, 0.1


# nested central differences: i times in x, j times in x'
def finite_difference(i, j, h=1e-3):
    total = 0.0
    for s in range(i + 1):
        for t in range(j + 1):
            w = (-1) ** (s + t) * comb(i, s) * comb(j, t)
            total += w * k.evaluate(x + (i / 2 - s) * h, xp + (j / 2 - t) * h)
    return total / h ** (i + j)


print("\n i j   closed form     finite difference")
for i in range(3):
    for j in range(3):
        print(f" {i} {j}  {kernel_derivative(k, i, j, x, xp): .9f}  {finite_difference(i, j): .9f}")

# exchanging the roles of x and x' is exact, not just approximate
assert kernel_derivative(k, 2, 1, x, xp) == kernel_derivative(k, 1, 2, xp, x)

# the variance of the q-th derivative at a point is a^2 (2q-1)!! / l^(2q)
for q in range(4):
    print(f"prior variance of order {q}: {k.prior_variance(q):.6g}")
