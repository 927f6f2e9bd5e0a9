import numpy as np
import pytest

from rkhs_interp.kernels import (
    Bernstein1Kernel,
    FourierKernel,
    H2PartKernel,
    LagrangeKernel,
    OddSplineKernel,
    PolynomialKernel,
    Spline01Kernel,
    TaylorKernel,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def family_kernels():
    """One representative per family, with a sampling box inside its domain."""
    return {
        "Polynomial": (PolynomialKernel(m=3, t0=0.2), (-1.0, 1.0)),
        "Taylor": (TaylorKernel(n_terms=30, t0=0.0), (-1.0, 1.0)),
        "Spline01": (Spline01Kernel(), (0.0, 1.0)),
        "Fourier": (FourierKernel(n_terms=64), (0.0, 2.0)),
        "Lagrange": (LagrangeKernel([-0.5, 0.0, 0.3, 0.8]), (-1.0, 1.0)),
        "Bernstein1": (Bernstein1Kernel(), (-1.0, 2.0)),
        "OddSpline": (OddSplineKernel(2, [0.1, 0.9], (0.0, 1.0)), (0.0, 1.0)),
        "OddSpline3": (OddSplineKernel(3, [0.2, 0.5, 0.7], (-0.5, 1.5)), (-0.5, 1.5)),
        "H2Part-K": (H2PartKernel("K"), (0.0, 1.0)),
        "H2Part-L": (H2PartKernel("L"), (0.0, 1.0)),
        "H2Part-H": (H2PartKernel("H"), (0.0, 1.0)),
    }


FAMILY_IDS = list(family_kernels())
