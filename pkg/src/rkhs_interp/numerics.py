"""Shared numerical substrate: jittered Cholesky solves, composite quadrature
with explicit kink splitting, finite differences and the scalar products of
the function spaces used by the reproducing checks.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpotrf

from .errors import MembershipError, ParameterError, RankDeficiencyError

JITTER_SCHEDULE = (0.0, 1e-12, 1e-10, 1e-8)
MEMBERSHIP_TOL = 1e-10

_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def factor_solve(G, rhs, jitter_schedule=JITTER_SCHEDULE):
    """Solve ``(G + j I) x = rhs`` for the first jitter ``j`` that factorizes.

    Parameters
    ----------
    G : (n, n) array_like
        Symmetric matrix.
    rhs : (n,) or (n, k) array_like
    jitter_schedule : sequence of float
        Nonnegative diagonal shifts tried in order.

    Returns
    -------
    x : ndarray
    jitter : float
        The shift that was used.
    factor : (n, n) ndarray
        Lower Cholesky factor of ``G + jitter * I``.

    Raises
    ------
    RankDeficiencyError
        When every entry of the schedule fails. ``pivot`` holds the
        zero-based index of the failing pivot at the largest jitter.
    """
    G = np.asarray(G, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ParameterError(f"Gram matrix must be square, got shape {G.shape}")
    n = G.shape[0]
    if n == 0:
        return np.zeros_like(rhs), 0.0, np.zeros((0, 0))
    pivot = None
    for jitter in jitter_schedule:
        if jitter < 0:
            raise ParameterError("jitter values must be nonnegative")
        shifted = G + jitter * np.eye(n)
        factor, info = dpotrf(shifted, lower=1, clean=1, overwrite_a=0)
        if info == 0:
            x = cho_solve((factor, True), rhs, check_finite=False)
            return x, float(jitter), factor
        pivot = int(info) - 1
    raise RankDeficiencyError(
        f"Gram matrix is not positive definite even with jitter "
        f"{jitter_schedule[-1]:g}; failing pivot {pivot}",
        pivot=pivot,
    )


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule description.

    ``panels`` is the total panel budget over ``[a, b]``; it is shared among the
    pieces delimited by ``split_points`` in proportion to their length, with at
    least one panel per piece.
    """

    panels: int = 2000
    scheme: str = "simpson"
    split_points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if int(self.panels) < 1:
            raise ParameterError("panels must be >= 1")
        if self.scheme not in ("simpson", "gauss_legendre5"):
            raise ParameterError(f"unknown quadrature scheme {self.scheme!r}")
        object.__setattr__(self, "panels", int(self.panels))
        object.__setattr__(
            self, "split_points", tuple(sorted(float(p) for p in self.split_points))
        )

    def with_splits(self, points):
        return QuadratureRule(self.panels, self.scheme, tuple(points))


def _vector_call(f, x):
    y = np.asarray(f(x), dtype=float)
    return np.broadcast_to(y, x.shape)


def integrate(f, a, b, rule=None):
    """Integrate ``f`` over ``[a, b]`` with a composite rule.

    ``f`` must accept a 1-D array of abscissae. Kinks listed in
    ``rule.split_points`` become panel boundaries so that every panel sees a
    smooth integrand.
    """
    rule = rule or QuadratureRule()
    a, b = float(a), float(b)
    if b < a:
        raise ParameterError(f"integration bounds reversed: [{a}, {b}]")
    if a == b:
        return 0.0
    inner = []
    for p in rule.split_points:
        if p < a or p > b:
            raise ParameterError(f"split point {p} outside [{a}, {b}]")
        if a < p < b and (not inner or p > inner[-1]):
            inner.append(p)
    cuts = np.array([a, *inner, b])
    widths = np.diff(cuts)
    counts = np.maximum(1, np.rint(rule.panels * widths / (b - a))).astype(int)
    total = 0.0
    for lo, hi, n in zip(cuts[:-1], cuts[1:], counts):
        edges = np.linspace(lo, hi, n + 1)
        left, right = edges[:-1], edges[1:]
        width = right - left
        if rule.scheme == "simpson":
            # one-sided values at piece ends, where f may jump
            probe = edges.copy()
            probe[0] = np.nextafter(lo, hi)
            probe[-1] = np.nextafter(hi, lo)
            fe = _vector_call(f, probe)
            fm = _vector_call(f, 0.5 * (left + right))
            total += np.sum(width * (fe[:-1] + 4.0 * fm + fe[1:])) / 6.0
        else:
            x = 0.5 * (left + right)[:, None] + 0.5 * width[:, None] * _GL5_NODES[None, :]
            fx = _vector_call(f, x.ravel()).reshape(x.shape)
            total += np.sum(0.5 * width * (fx @ _GL5_WEIGHTS))
    return float(total)


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def finite_diff(f, t, order=1, h=1e-5):
    """Central finite-difference estimate of ``f^(order)(t)``.

    Even orders use the stencil ``t + (order/2 - i) h``; odd orders use the
    same stencil with spacing ``2h``, so that ``order=1`` is the usual
    ``(f(t+h) - f(t-h)) / 2h``. Both are exact for polynomials of degree
    ``order + 1``.
    """
    order = int(order)
    if order < 1:
        raise ParameterError("finite difference order must be >= 1")
    if h <= 0:
        raise ParameterError("finite difference step must be positive")
    step = h if order % 2 == 0 else 2.0 * h
    total = 0.0
    for i in range(order + 1):
        total += (-1) ** i * comb(order, i) * f(t + (order / 2 - i) * step)
    return total / step**order


# ---------------------------------------------------------------------------
# scalar products of the function spaces
# ---------------------------------------------------------------------------

SPACE_KINDS = ("H1_zero0", "Fourier02", "H2_mixed", "Hm_theta")


@dataclass(frozen=True)
class SpaceSpec:
    """A Sobolev-type space together with its scalar product.

    kinds
        ``H1_zero0``  f(0) = 0, <f|g> = int_0^1 f'g'
        ``Fourier02`` f(0) = f(2), int_0^2 f = 0, <f|g> = int_0^2 f'g'
        ``H2_mixed``  <f|g> = f(0)g(0) + f'(0)g'(0) + int_0^1 f''g''
        ``Hm_theta``  f(theta_j) = 0, <f|g> = int_a^b f^(m) g^(m)
    """

    kind: str
    m: int | None = None
    thetas: tuple = ()
    interval: tuple | None = None

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise ParameterError(f"unknown space kind {self.kind!r}")
        if self.kind == "Hm_theta":
            if self.m is None or self.m < 1:
                raise ParameterError("Hm_theta needs m >= 1")
            if len(self.thetas) != self.m:
                raise ParameterError("Hm_theta needs exactly m thetas")
            if self.interval is None:
                raise ParameterError("Hm_theta needs an interval")
            object.__setattr__(self, "thetas", tuple(float(x) for x in self.thetas))

    @property
    def bounds(self):
        if self.kind == "Fourier02":
            return (0.0, 2.0)
        if self.kind == "Hm_theta":
            return tuple(float(x) for x in self.interval)
        return (0.0, 1.0)

    @property
    def order(self):
        return {"H1_zero0": 1, "Fourier02": 1, "H2_mixed": 2}.get(self.kind, self.m)


def _fd_step(order):
    return {1: 1e-6, 2: 1e-4}.get(order, 1e-2)


def derivative(f, order):
    """Return a callable for the ``order``-th derivative of ``f``.

    ``f`` is either a callable or a sequence ``(f, f', f'', ...)``; missing
    derivatives are approximated by central finite differences.
    """
    if isinstance(f, Sequence) and not isinstance(f, str):
        if order < len(f):
            return f[order]
        base = f[len(f) - 1]
        remaining = order - len(f) + 1
    else:
        base, remaining = f, order
    if remaining == 0:
        return base
    step = _fd_step(remaining)
    return lambda x: finite_diff(base, np.asarray(x, dtype=float), remaining, step)


def _check_member(space, f, name):
    f0 = derivative(f, 0)
    a, b = space.bounds
    if space.kind == "H1_zero0":
        bad = abs(float(f0(0.0))) > MEMBERSHIP_TOL
        why = "f(0) = 0"
    elif space.kind == "Fourier02":
        mean = integrate(f0, 0.0, 2.0)
        bad = (abs(float(f0(0.0)) - float(f0(2.0))) > MEMBERSHIP_TOL
               or abs(mean) > MEMBERSHIP_TOL)
        why = "f(0) = f(2) and int_0^2 f = 0"
    elif space.kind == "Hm_theta":
        bad = any(abs(float(f0(th))) > MEMBERSHIP_TOL for th in space.thetas)
        why = "f(theta_j) = 0"
    else:
        bad = False
        why = ""
    if bad:
        raise MembershipError(f"{name} violates the {space.kind} constraint {why}")


def inner_product(space: SpaceSpec, f, g, rule: QuadratureRule | None = None):
    """Scalar product of ``f`` and ``g`` in ``space``.

    Each of ``f`` and ``g`` is a callable or a sequence of callables
    ``(f, f', ...)``. Kinks of the integrand should be supplied through
    ``rule.split_points``.
    """
    _check_member(space, f, "f")
    _check_member(space, g, "g")
    a, b = space.bounds
    m = space.order
    fm, gm = derivative(f, m), derivative(g, m)
    value = integrate(lambda x: fm(x) * gm(x), a, b, rule)
    if space.kind == "H2_mixed":
        for j in range(2):
            value += float(derivative(f, j)(0.0)) * float(derivative(g, j)(0.0))
    return value

