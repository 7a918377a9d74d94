"""Semigroup, resolvent and regularized energies of a path graph.

Shows the heat flow smoothing an indicator, the resolvent contraction
bound, and the monotone convergence of the regularized energies up to the
true energy as the regularization parameter grows.
"""

import numpy as np

from ergodec import DirichletForm, resolvent, semigroup, validate_space, yosida_form

n = 6
space = validate_space([(i, 1.0 / n) for i in range(n)])
jump = np.zeros((n, n))
for i in range(n - 1):
    jump[i, i + 1] = jump[i + 1, i] = 1.0
path = DirichletForm.from_jump_kernel(space, jump)

f = np.zeros(n)
f[0] = 1.0
for t in (0.0, 0.1, 1.0, 10.0):
    print(f"T_{t:<4} f = {np.round(semigroup(path, t) @ f, 4)}")

for alpha in (0.5, 1.0, 10.0):
    g = resolvent(path, alpha)
    s = np.sqrt(space.mu)
    norm = np.linalg.norm(g * s[:, None] / s[None, :], 2)
    print(f"||G_{alpha}||  = {norm:.6f}  (bound 1/alpha = {1 / alpha})")

print("E(f) =", path.energy(f))
for beta in (1.0, 10.0, 100.0, 1e4, 1e6):
    print(f"beta={beta:<8g} regularized energy = {yosida_form(path, beta).energy(f):.12f}")
