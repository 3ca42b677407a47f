"""Exact 8x8 model-cone matrices of c0 - Delta for the assembly test.

Grid r_i = -3.5 + i (h = 1). The inner matrix is a polynomial in the
difference matrix with rational entries; only the e^{r_i + r_j} factors are
irrational, so every entry is written to 25 significant digits.

    python3 make_assembly_fixture.py > assembly_n8.csv
"""
import sympy as sp

N = 8
r = [sp.Rational(-7, 2) + i for i in range(N)]
D = sp.zeros(N, N)
for i in range(N - 1):
    D[i, i + 1] = sp.Rational(1, 2)
    D[i + 1, i] = -sp.Rational(1, 2)

# (n, nu, gamma, shift)
cases = [
    (1, 0, sp.Integer(0), 0),
    (1, -4, sp.Integer(0), 1),
    (4, -4, sp.Rational(1, 2), 0),
]

print("case,n,nu,gamma,shift,row,col,value")
for k, (n, nu, gamma, shift) in enumerate(cases):
    beta = sp.Rational(n + 1, 2) - gamma
    B = D + (beta - 1) * sp.eye(N)  # mu = 2, so the split shift is beta - mu/2
    inner = -B * B + (n - 1) * B - nu * sp.eye(N)
    for i in range(N):
        for j in range(N):
            v = sp.exp(r[i] + r[j]) * inner[i, j] + (shift if i == j else 0)
            print(f"{k},{n},{nu},{float(gamma)},{shift},{i},{j},{sp.N(v, 25)}")
