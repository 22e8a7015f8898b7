"""Evaluate E_{alpha,1}(-x) across regimes and compare with closed forms.

    python3 demos/mittag_leffler_tour.py
"""

import numpy as np
from scipy.special import erfcx

from fracback import ml_eval, ml_values, MlParams

# regime selection on a few arguments
for x in (0.5, 3.0, 12.0, 80.0):
    rep = ml_eval(MlParams(0.5, 1.0), -x)
    print(f"x={x:6.1f}  E_0.5(-x)={rep.value:.15e}  regime={rep.regime}")

# alpha = 1/2 has the closed form exp(x^2) erfc(x)
x = np.linspace(0.0, 10.0, 201)
err = np.max(np.abs(ml_values(0.5, 1.0, -x) - erfcx(x)))
print(f"\nmax |E_0.5(-x) - erfcx(x)| on [0, 10]: {err:.2e}")

# slow algebraic tail for alpha < 1 versus exponential decay at alpha = 1
print("\n   x    alpha=0.3     alpha=0.7     alpha=1")
for x in (1.0, 10.0, 100.0):
    row = [ml_values(a, 1.0, [-x])[0] for a in (0.3, 0.7, 1.0)]
    print(f"{x:5.0f}  " + "  ".join(f"{v:.6e}" for v in row))
