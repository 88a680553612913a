"""Averaging in two steps versus against the joint weight.

Given a weight P(u, v, lam) on a finite grid, average A*B over lam for each
(u, v) and then over (u, v). The result equals the single sum against P
whenever the conditional weights come from P itself. When a different P
is used for each pair of settings, the four CHSH correlations no longer
come from one weight and the bound can fail.
"""

import numpy as np

from bellcompat import chsh, legget_joint_average, legget_two_step, model_from_joint

rng = np.random.default_rng(0)
U = np.linspace(0, np.pi, 4, endpoint=False)
V = np.linspace(0, np.pi, 4, endpoint=False)
lam = np.linspace(-1, 1, 8)
A = lambda a, b, u, v, l: np.where(np.cos(2 * (u - a)) + l >= 0, 1, -1)
B = lambda a, b, u, v, l: np.where(np.cos(2 * (v - b)) + l >= 0, 1, -1)
settings = [(0, np.pi / 8), (0, 3 * np.pi / 8), (np.pi / 4, np.pi / 8), (np.pi / 4, 3 * np.pi / 8)]

worst = 0.0
for _ in range(200):
    P = rng.dirichlet(np.ones(128)).reshape(4, 4, 8)
    a, b = settings[rng.integers(4)]
    worst = max(worst, abs(legget_two_step(model_from_joint(P, A, B, a, b, U, V, lam))
                           - legget_joint_average(P, A, B, a, b, U, V, lam)))
print(f"largest two-step vs joint discrepancy over 200 weights: {worst:.1e}")

P = rng.dirichlet(np.ones(128)).reshape(4, 4, 8)
shared = [legget_two_step(model_from_joint(P, A, B, a, b, U, V, lam)) for a, b in settings]
print("one weight for all settings:  CHSH", round(chsh(*shared).lhs, 4))

uu, vv, ll = np.meshgrid(U, V, lam, indexing="ij")
per_setting = []
for (a, b), target in zip(settings, [1, 1, 1, -1]):
    Q = (A(a, b, uu, vv, ll) * B(a, b, uu, vv, ll) == target).astype(float)
    per_setting.append(legget_two_step(model_from_joint(Q / Q.sum(), A, B, a, b, U, V, lam)))
print("a weight per setting pair:    CHSH", round(chsh(*per_setting).lhs, 4))
