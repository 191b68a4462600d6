"""Tour of the SO(3)/SE(3)/R^n operators the filter is built on."""

import numpy as np

from lgpose import liegroups as lie

np.set_printoptions(precision=4, suppress=True)

print("== SO(3) ==")
phi = np.array([0.3, -0.5, 0.2])
R = lie.so3_exp(phi)
print("exp of", phi, "->\n", R)
print("log recovers:", lie.so3_log(R))
print("orthonormality defect:", np.max(np.abs(R.T @ R - np.eye(3))))

print("\n== SE(3) ==")
xi = np.array([0.1, 0.2, -0.3, 0.4, -0.2, 0.5])  # (rho, phi)
T = lie.se3_exp(xi)
print("exp of twist ->\n", T)
print("roundtrip defect:", np.max(np.abs(lie.se3_log(T) - xi)))

print("\nAdjoint transports twists through conjugation:")
e = np.array([0.05, 0.0, 0.0, 0.0, 0.1, 0.0])
lhs = T @ lie.se3_exp(e) @ lie.se3_inverse(T)
rhs = lie.se3_exp(lie.se3_adjoint(T) @ e)
print("|T exp(e) T^-1 - exp(Ad_T e)| =", np.max(np.abs(lhs - rhs)))

print("\nThe odot operator swaps a twist out of a point product:")
a, b = np.array([1.0, 2.0, 3.0, 0.1, 0.2, 0.3]), np.array([0.5, -0.5, 1.0, 1.0])
print("|hat(a) b - odot(b) a| =", np.max(np.abs(lie.se3_hat(a) @ b - lie.se3_odot(b) @ a)))

print("\n== series oracles ==")
print("closed-form Rodrigues vs 20-term series:",
      np.max(np.abs(lie.so3_exp(phi) - lie.exp_series(lie.so3_hat(phi), 20))))
jr = lie.se3_right_jacobian(xi, 10)
delta = 1e-5 * np.ones(6)
defect = lie.se3_exp(xi + delta) - lie.se3_exp(xi) @ lie.se3_exp(jr @ delta)
print("right-Jacobian first-order defect (should be O(|delta|^2)):", np.max(np.abs(defect)))
