"""The two alignment losses, their closed-form values, and an analytic
gradient checked against central finite differences.
"""
import math

import numpy as np

from embalign import (ProjectionHead, infonce_loss, infonce_loss_as_printed,
                      loss_gradient, mse_loss)
from embalign.losses import batch_loss

# Perfectly aligned orthonormal batch: the diagonal carries similarity
# 1, everything else 0, so the loss is -ln(e / (e + 2)).
eye = np.eye(3)
loss, sims = infonce_loss(eye, eye, tau=1.0)
print(f"orthonormal batch: loss={loss:.6f}  closed form="
      f"{-math.log(math.e / (math.e + 2)):.6f}")

# When every row is identical the softmax is uniform and the loss is
# ln N regardless of the vectors.
proj = np.tile([[1.0, 2.0]], (5, 1))
tgt = np.tile([[3.0, 1.0]], (5, 1))
print(f"identical rows (N=5): loss={infonce_loss(proj, tgt, 0.5)[0]:.6f}  "
      f"ln 5={math.log(5):.6f}")

# The matched-pairs-only variant has no cross terms: on the orthonormal
# batch it degenerates to a uniform softmax over equal diagonals.
print(f"matched-pairs-only variant: {infonce_loss_as_printed(eye, eye, 1.0):.6f}"
      f"  (ln 3={math.log(3):.6f})")

# MSE alternative.
print(f"mse perfect: {mse_loss(eye, eye)}")
print(f"mse [0,0] vs [3,4]: "
      f"{mse_loss(np.array([[0., 0.]]), np.array([[3., 4.]]))}")

# Gradient check against a finite-difference oracle.
rng = np.random.default_rng(0)
x = rng.standard_normal((6, 5))
t = rng.standard_normal((6, 4))
w = 0.5 * rng.standard_normal((5, 4))
analytic = loss_gradient(ProjectionHead(w), x, t, "infonce", tau=0.3)

h = 1e-5
numeric = np.zeros_like(w)
for i in range(5):
    for j in range(4):
        wp, wm = w.copy(), w.copy()
        wp[i, j] += h
        wm[i, j] -= h
        numeric[i, j] = (batch_loss(x @ wp, t, "infonce", 0.3)
                         - batch_loss(x @ wm, t, "infonce", 0.3)) / (2 * h)
rel = np.max(np.abs(analytic - numeric)) / np.max(np.abs(numeric))
print(f"gradient vs finite differences: max relative error {rel:.2e}")
