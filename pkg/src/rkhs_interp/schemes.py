"""Classical interpolation schemes as minimum-norm problems over concrete
kernels, plus the Peano-kernel identity and the B-spline approximate
identity built from the ``H^2(0, 1)`` kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .algebra import schur_product, second_difference_kernel, tensor_kernel
from .engine import Functional, InterpolationProblem, solve_min_norm
from .errors import CapabilityError, DomainError, InfeasibleError, ParameterError
from .kernels import (
    Bernstein1Kernel,
    FourierKernel,
    H2PartKernel,
    LagrangeKernel,
    OddSplineKernel,
    Spline01Kernel,
    TaylorKernel,
)
from .numerics import QuadratureRule, SpaceSpec, derivative, integrate

DEFAULT_H_LIST = (0.2, 0.1, 0.05, 0.025)

# name -> (f, f', f'')
FUNCTION_CATALOG = {
    "one": (lambda s: np.ones_like(np.asarray(s, dtype=float)),
            lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            lambda s: np.zeros_like(np.asarray(s, dtype=float))),
    "linear": (lambda s: np.asarray(s, dtype=float),
               lambda s: np.ones_like(np.asarray(s, dtype=float)),
               lambda s: np.zeros_like(np.asarray(s, dtype=float))),
    "square": (lambda s: np.asarray(s, dtype=float) ** 2,
               lambda s: 2.0 * np.asarray(s, dtype=float),
               lambda s: 2.0 * np.ones_like(np.asarray(s, dtype=float))),
    "sin": (np.sin, np.cos, lambda s: -np.sin(s)),
    "exp": (np.exp, np.exp, np.exp),
    "cos_pi": (lambda s: np.cos(np.pi * np.asarray(s, dtype=float)),
               lambda s: -np.pi * np.sin(np.pi * np.asarray(s, dtype=float)),
               lambda s: -np.pi**2 * np.cos(np.pi * np.asarray(s, dtype=float))),
}


def catalog_function(name):
    try:
        return FUNCTION_CATALOG[name]
    except KeyError:
        raise ParameterError(
            f"unknown function {name!r}; expected one of {sorted(FUNCTION_CATALOG)}"
        ) from None


# ---------------------------------------------------------------------------
# Lagrange and Taylor
# ---------------------------------------------------------------------------

def lagrange_fit(nodes, values):
    """Interpolating polynomial through ``(nodes, values)``, obtained as the
    minimum-norm element for ``<P|Q> = sum_j P(theta_j) Q(theta_j)``."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.shape != values.shape:
        raise ParameterError("nodes and values must have the same length")
    kernel = LagrangeKernel(nodes)
    functionals = tuple(Functional.point_eval(x) for x in nodes)
    return solve_min_norm(InterpolationProblem(kernel, functionals, values))


def taylor_fit(t0, derivatives, n_terms=30):
    """Degree-N Taylor polynomial from ``derivatives = (f(t0), ..., f^(N)(t0))``.

    The data enter as derivative-evaluation functionals at ``t0`` on the
    truncated Taylor kernel, whose Gram matrix for them is the identity.
    """
    derivatives = np.asarray(derivatives, dtype=float).ravel()
    if n_terms < derivatives.size:
        raise CapabilityError(
            f"Taylor kernel with {n_terms} terms cannot carry {derivatives.size} derivatives"
        )
    kernel = TaylorKernel(n_terms=n_terms, t0=t0)
    functionals = tuple(
        Functional.point_eval(t0) if j == 0 else Functional.deriv_eval(t0, j)
        for j in range(derivatives.size)
    )
    return solve_min_norm(InterpolationProblem(kernel, functionals, derivatives))


# ---------------------------------------------------------------------------
# Bezier-Bernstein
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BilinearPatch:
    """Corner values; ``a10`` is the value at ``(s, t) = (1, 0)``."""

    a00: float
    a01: float
    a10: float
    a11: float

    def __post_init__(self):
        if not all(np.isfinite([self.a00, self.a01, self.a10, self.a11])):
            raise ParameterError("patch corner values must be finite")

    def closed_form(self, s, t):
        s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
        return (self.a00 * (1 - s) * (1 - t) + self.a01 * (1 - s) * t
                + self.a10 * s * (1 - t) + self.a11 * s * t)

    def diagonal_form(self, s):
        """Degree-two Bernstein form of the patch restricted to ``s = t``."""
        s = np.asarray(s, dtype=float)
        return self.a00 * (1 - s) ** 2 + (self.a01 + self.a10) * s * (1 - s) + self.a11 * s**2


class Surface:
    """Bivariate interpolant called as ``surface(s, t)``."""

    def __init__(self, interpolant):
        self.interpolant = interpolant

    def __call__(self, s, t):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        return self.interpolant(np.stack([s, t], axis=-1))


def bezier_bilinear_fit(patch: BilinearPatch) -> Surface:
    """Bilinear Bezier patch as the minimum-norm solution over
    ``Bernstein1 (x) Bernstein1`` with the four corner constraints."""
    kernel = tensor_kernel(Bernstein1Kernel(), Bernstein1Kernel())
    corners = ((0, 0), (0, 1), (1, 0), (1, 1))
    values = (patch.a00, patch.a01, patch.a10, patch.a11)
    functionals = tuple(Functional.point_eval(c) for c in corners)
    return Surface(solve_min_norm(InterpolationProblem(kernel, functionals, values)))


def restrict_diagonal(surface):
    """``tau(s) = surface(s, s)``."""
    return lambda s: surface(s, s)


def diagonal_fit(points, values):
    """Minimum-norm fit over the pointwise product ``Bernstein1 * Bernstein1``
    (the diagonal restriction of the tensor kernel)."""
    kernel = schur_product(Bernstein1Kernel(), Bernstein1Kernel())
    functionals = tuple(Functional.point_eval(p) for p in points)
    return solve_min_norm(InterpolationProblem(kernel, functionals, values))


# ---------------------------------------------------------------------------
# odd-degree polynomial splines
# ---------------------------------------------------------------------------

def odd_spline_fit(m, thetas, nodes, values, interval=(0.0, 1.0)):
    """Spline of degree ``2m - 1`` minimizing ``int_a^b (f^(m))^2`` among
    functions vanishing at ``thetas`` and matching ``values`` at ``nodes``.

    Raises
    ------
    InfeasibleError
        A node coincides with a theta while its value is nonzero.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.shape != values.shape:
        raise ParameterError("nodes and values must have the same length")
    if np.any(np.diff(nodes) <= 0):
        raise ParameterError("spline nodes must be strictly increasing")
    kernel = OddSplineKernel(m, thetas, interval)
    keep = np.ones(nodes.size, dtype=bool)
    for i, x in enumerate(nodes):
        if np.any(x == kernel.thetas):
            if values[i] != 0:
                raise InfeasibleError(
                    f"node {x} coincides with a theta but its value is {values[i]}; "
                    "every element of the space vanishes there",
                    pivot=i,
                )
            keep[i] = False  # already enforced by the space
    if nodes.size - 1 <= kernel.m:
        raise ParameterError(
            f"need nodes t_0..t_n with n > m={kernel.m}, got {nodes.size} nodes"
        )
    functionals = tuple(Functional.point_eval(x) for x in nodes[keep])
    return solve_min_norm(InterpolationProblem(kernel, functionals, values[keep]))


# ---------------------------------------------------------------------------
# reproducing identities
# ---------------------------------------------------------------------------

class PeanoCheck(NamedTuple):
    lhs: float
    rhs: float
    error: float


def peano_identity_check(f, t, panels=2000):
    """Compare ``f(t)`` with ``f(0) + t f'(0) + int_0^1 (t - s)_+ f''(s) ds``.

    ``f`` is a sequence ``(f, f', f'')`` (missing derivatives are finite
    differenced). The integral is split at the kink ``s = t``.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    f0, f1, f2 = (derivative(f, j) for j in range(3))
    peano = H2PartKernel("L")
    rule = QuadratureRule(panels, split_points=(t,))
    integral = integrate(lambda s: peano.partial(s, t, 2, 0) * f2(s), 0.0, 1.0, rule)
    lhs = float(f0(t))
    rhs = float(f0(0.0)) + t * float(f1(0.0)) + integral
    return PeanoCheck(lhs, rhs, abs(lhs - rhs))


_REPRODUCING_SPACES = {
    "Spline01": SpaceSpec("H1_zero0"),
    "Fourier": SpaceSpec("Fourier02"),
}


def reproducing_error(kernel, f, t, panels=2000):
    """``|<f | H(., t)> - f(t)|`` with the scalar product computed by
    quadrature split at ``s = t``.

    Supported for the ``H^1`` kernels (Spline01, Fourier) and the full
    ``H^2`` kernel (H2Part with part ``H``).
    """
    t = float(t)
    f0 = derivative(f, 0)
    rule = QuadratureRule(panels, split_points=(t,))
    if kernel.family in _REPRODUCING_SPACES:
        a, b = _REPRODUCING_SPACES[kernel.family].bounds
        f1 = derivative(f, 1)
        value = integrate(lambda s: f1(s) * kernel.partial(s, t, 1, 0), a, b, rule)
    elif kernel.family == "H2Part" and kernel.part == "H":
        f1, f2 = derivative(f, 1), derivative(f, 2)
        value = (float(f0(0.0)) * kernel.eval(0.0, t)
                 + float(f1(0.0)) * kernel.partial(0.0, t, 1, 0)
                 + integrate(lambda s: f2(s) * kernel.partial(s, t, 2, 0), 0.0, kernel.upper, rule))
    else:
        raise CapabilityError(f"no reproducing check for {kernel.describe()}")
    return abs(value - float(f0(t)))


def fourier_reproducing_error(n_terms, f, ts=None, panels=2000):
    """Largest reproducing error of the truncated Fourier kernel over ``ts``."""
    kernel = FourierKernel(n_terms)
    ts = np.linspace(0.0, 2.0, 21) if ts is None else ts
    return max(reproducing_error(kernel, f, t, panels) for t in ts)


def spline01_reproducing_error(f, t, panels=2000):
    return reproducing_error(Spline01Kernel(), f, t, panels)


# ---------------------------------------------------------------------------
# Dirac approximation by the B-spline kernel L_h
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiracStudyRow:
    h: float
    t: float
    approx: float
    target: float
    abs_error: float


def b_spline_kernel(h, upper=None):
    """``L_h``: forward second differences of the ``H^2`` kernel part ``L``.

    ``L`` is built on ``[0, 1 + 2h]`` (its formula does not depend on the
    right end) so that ``L_h`` is defined on all of ``[0, 1]``.
    """
    upper = 1.0 + 2.0 * h if upper is None else upper
    return second_difference_kernel(H2PartKernel("L", upper=upper), h)


def dirac_convergence_study(f, t=0.5, h_list=DEFAULT_H_LIST, panels=2000):
    """Rows ``(h, t, int_0^1 L_h(s, t) f(s) ds, f(t), error)``, one per ``h``.

    ``f`` is a callable, a derivative sequence, or a catalog name.
    """
    if isinstance(f, str):
        f = catalog_function(f)
    f0 = derivative(f, 0)
    h_list = [float(h) for h in h_list]
    if not h_list:
        raise ParameterError("h_list must not be empty")
    if any(h <= 0 for h in h_list):
        raise ParameterError("every h must be positive")
    t = float(t)
    reach = 2.0 * max(h_list)
    if not (0.0 < t - reach and t + reach < 1.0):
        raise DomainError(f"t={t} needs t +- {reach} inside (0, 1)")
    target = float(f0(t))
    rows = []
    for h in h_list:
        kernel = b_spline_kernel(h)
        rule = QuadratureRule(panels, split_points=[t + k * h for k in range(-2, 3)])
        approx = integrate(lambda s: kernel.eval(s, t) * f0(s), 0.0, 1.0, rule)
        rows.append(DiracStudyRow(h, t, approx, target, abs(approx - target)))
    return rows
