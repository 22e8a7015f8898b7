"""Build a full stability certificate for one initial state and print it."""

import numpy as np

from fracback import SpectralField, dirichlet_laplacian_1d, run_certificate

es = dirichlet_laplacian_1d(1.0, 64)
rng = np.random.default_rng(20240501)
u0 = SpectralField(rng.standard_normal(64) / np.arange(1, 65) ** 3, es)
R, eps = 2.0, 1.0
u0 = u0 * (0.9 * R / max(u0.norm(), u0.operator_norm(), u0.power_norm(eps)))

cert = run_certificate(u0, 0.5, 1.0, R, eps)
print(cert.render().splitlines()[0])
print(f"\n{len(cert.checks)} checks, all passed: {cert.passed}")
print("tightest margins:")
for c in sorted(cert.checks, key=lambda c: c.margin)[:5]:
    print("  " + c.render())
