"""Reproducing kernels with closed forms.

Every kernel is an immutable object evaluating ``H(s, t)`` and, where the
family allows it, the analytic partial derivatives
``d^a/ds^a d^b/dt^b H(s, t)``. Evaluation broadcasts over numpy arrays.

Piecewise kernels are written in terms of truncated powers of ``x = s - t``.
Where a requested derivative jumps across ``s = t`` the value returned is the
limit from ``s > t`` and the point is reported as a kink.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from math import factorial, inf, pi

import numpy as np

from .errors import CapabilityError, DomainError, ParameterError

DOMAIN_TOL = 1e-12
REAL_LINE = (-inf, inf)


def truncated_power(x, p):
    """``x_+^p / p!``, taken as 1 at ``x = 0`` when ``p == 0``."""
    x = np.asarray(x, dtype=float)
    if p < 0:
        return np.zeros_like(x)
    if p == 0:
        return (x >= 0).astype(float)
    return np.where(x > 0, x, 0.0) ** p / factorial(p)


def cubic_bspline(x, order=0):
    """Derivative of ``order`` (0 to 3) of the centred cubic B-spline on
    ``(-2, 2)``, with the kink mask. Third derivatives take the limit from
    the right at the knots."""
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    sign = np.where(x < 0, -1.0, 1.0)
    inner, outer = r < 1, (r >= 1) & (r < 2)
    if order == 0:
        value = np.where(inner, (4 - 6 * r**2 + 3 * r**3) / 6, np.where(outer, (2 - r) ** 3 / 6, 0.0))
    elif order == 1:
        value = sign * np.where(inner, -2 * r + 1.5 * r**2, np.where(outer, -0.5 * (2 - r) ** 2, 0.0))
    elif order == 2:
        value = np.where(inner, -2 + 3 * r, np.where(outer, 2 - r, 0.0))
    elif order == 3:
        # right-continuous piecewise constant
        cell = np.floor(x)
        value = np.select([cell == -2, cell == -1, cell == 0, cell == 1], [1.0, -3.0, 3.0, -1.0], 0.0)
    else:
        raise CapabilityError(f"cubic B-spline derivative of order {order} is not provided")
    kink = (order == 3) & np.isin(x, (-2.0, -1.0, 0.0, 1.0, 2.0))
    return value, kink


def _normalize_order(order, ndim):
    if ndim == 1:
        if isinstance(order, (tuple, list)):
            if len(order) != 1:
                raise ParameterError(f"expected a scalar derivative order, got {order!r}")
            order = order[0]
        order = int(order)
        if order < 0:
            raise ParameterError("derivative orders must be nonnegative")
        return order
    if isinstance(order, (tuple, list)):
        if len(order) != ndim:
            raise ParameterError(f"expected {ndim} derivative orders, got {order!r}")
        out = tuple(int(o) for o in order)
    else:
        if int(order) != 0:
            raise ParameterError(f"a {ndim}-d kernel needs a tuple of derivative orders")
        out = (0,) * ndim
    if any(o < 0 for o in out):
        raise ParameterError("derivative orders must be nonnegative")
    return out


class Kernel(ABC):
    """A symmetric positive-type function on ``domain x domain``.

    ``domain`` is a tuple of closed intervals, one per coordinate. One
    dimensional kernels take plain arrays of points; ``ndim > 1`` kernels take
    arrays whose last axis holds the coordinates.
    """

    family: str | None = None
    domain: tuple = (REAL_LINE,)

    @property
    def ndim(self):
        return len(self.domain)

    def __call__(self, s, t):
        return self.eval(s, t)

    def eval(self, s, t):
        return self.partial(s, t, 0, 0)

    def partial(self, s, t, order_s=0, order_t=0, return_kink=False):
        """Partial derivative ``d^order_s/ds d^order_t/dt H(s, t)``.

        Parameters
        ----------
        s, t : array_like
            Broadcastable evaluation points.
        order_s, order_t : int or tuple of int
            Derivative orders; tuples for multivariate kernels.
        return_kink : bool
            Also return a boolean mask marking points where the derivative is
            discontinuous and the one-sided convention was applied.

        Raises
        ------
        CapabilityError
            If the family has no analytic derivative of that order.
        DomainError
            If a point lies outside the kernel's domain.
        """
        order_s = _normalize_order(order_s, self.ndim)
        order_t = _normalize_order(order_t, self.ndim)
        if not self.supports(order_s, order_t):
            raise CapabilityError(
                f"{self.describe()} does not provide the derivative of order "
                f"({order_s}, {order_t})"
            )
        s = self.check_points(s)
        t = self.check_points(t)
        value, kink = self._partial(s, t, order_s, order_t)
        value = np.asarray(value, dtype=float)
        if value.ndim == 0:
            value = float(value)
        if return_kink:
            shape = np.shape(value)
            return value, np.broadcast_to(np.asarray(kink, dtype=bool), shape).copy()
        return value

    def check_points(self, x):
        x = np.asarray(x, dtype=float)
        if self.ndim > 1 and (x.ndim == 0 or x.shape[-1] != self.ndim):
            raise DomainError(
                f"{self.describe()} expects points with last axis of size {self.ndim}"
            )
        for axis, (lo, hi) in enumerate(self.domain):
            xi = x if self.ndim == 1 else x[..., axis]
            if xi.size == 0:
                continue
            if not np.all(np.isfinite(xi)):
                raise DomainError(f"non-finite evaluation point for {self.describe()}")
            if (lo > -inf and np.min(xi) < lo - DOMAIN_TOL * max(1.0, abs(lo))) or (
                hi < inf and np.max(xi) > hi + DOMAIN_TOL * max(1.0, abs(hi))
            ):
                raise DomainError(
                    f"evaluation point outside [{lo}, {hi}] for {self.describe()}"
                )
        return x

    def supports(self, order_s, order_t):
        return order_s == 0 and order_t == 0

    @abstractmethod
    def _partial(self, s, t, a, b):
        """Return ``(value, kink_mask)`` for validated inputs."""

    def second_difference(self, s, t, h, a, b):
        """Closed form of the forward second difference with step ``h`` in
        both slots of the ``(a, b)`` partial, as ``(value, kink_mask)``.

        ``None`` means no closed form is known and the generic nine-point
        stencil is used, which loses about ``eps / h^4`` to cancellation.
        """
        return None

    @abstractmethod
    def to_dict(self):
        """JSON-ready description of the kernel."""

    def describe(self):
        return self.family or type(self).__name__

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()!r})"


# ---------------------------------------------------------------------------
# power-series kernels: Polynomial (finite degree) and truncated Taylor
# ---------------------------------------------------------------------------

class _SeriesKernel(Kernel):
    """``sum_{j<n} (s-t0)^j/j! (t-t0)^j/j!`` and its derivatives."""

    def __init__(self, n_terms, t0):
        self.n_terms = int(n_terms)
        self.t0 = float(t0)
        self.domain = (REAL_LINE,)

    def supports(self, order_s, order_t):
        return True

    def _partial(self, s, t, a, b):
        u, v = s - self.t0, t - self.t0
        total = np.zeros(np.broadcast(u, v).shape)
        for j in range(max(a, b), self.n_terms):
            total = total + (u ** (j - a) / factorial(j - a)) * (v ** (j - b) / factorial(j - b))
        return total, False

    def term(self, j, s, t):
        """The ``j``-th series term, used for truncation consistency checks."""
        u = np.asarray(s, dtype=float) - self.t0
        v = np.asarray(t, dtype=float) - self.t0
        return (u**j / factorial(j)) * (v**j / factorial(j))


class PolynomialKernel(_SeriesKernel):
    """Kernel of polynomials of degree ``<= m`` with the scalar product
    ``sum_j P^(j)(t0) Q^(j)(t0)``."""

    family = "Polynomial"

    def __init__(self, m=1, t0=0.0):
        if int(m) != m or m < 0:
            raise ParameterError(f"Polynomial kernel needs integer m >= 0, got {m!r}")
        super().__init__(int(m) + 1, t0)
        self.m = int(m)

    def to_dict(self):
        return {"family": self.family, "params": {"m": self.m, "t0": self.t0}}


class TaylorKernel(_SeriesKernel):
    """Truncation of the entire-function kernel whose minimum-norm
    interpolant for derivative data at ``t0`` is the Taylor polynomial.

    The omitted tail at ``s = t`` is ``sum_{j >= n} (s-t0)^{2j} / j!^2``,
    which decays factorially.
    """

    family = "Taylor"

    def __init__(self, n_terms=30, t0=0.0):
        if int(n_terms) != n_terms or n_terms < 1:
            raise ParameterError(f"Taylor kernel needs n_terms >= 1, got {n_terms!r}")
        super().__init__(n_terms, t0)

    def to_dict(self):
        return {"family": self.family, "params": {"n_terms": self.n_terms, "t0": self.t0}}


# ---------------------------------------------------------------------------
# H^1 kernels: Spline01 and Fourier
# ---------------------------------------------------------------------------

class Spline01Kernel(Kernel):
    """``H(s, t) = min(s, t) = s - (s - t)_+`` on ``[0, 1]``.

    Reproducing kernel of ``{f in H^1(0,1): f(0) = 0}`` with
    ``<f|g> = int_0^1 f'g'``.
    """

    family = "Spline01"

    def __init__(self):
        self.domain = ((0.0, 1.0),)

    def supports(self, order_s, order_t):
        return order_s + order_t <= 1

    def _partial(self, s, t, a, b):
        x = s - t
        if a == 0 and b == 0:
            return s - truncated_power(x, 1), False
        kink = x == 0
        if a == 1:
            return 1.0 - truncated_power(x, 0), kink
        return truncated_power(x, 0), kink

    def to_dict(self):
        return {"family": self.family, "params": {}}


class FourierKernel(Kernel):
    """``H(s, t) = sum_{k=1}^{N} cos(k pi (s - t)) / (k pi)^2`` on ``[0, 2]``.

    Kernel of the periodic, mean-zero subspace of ``H^1(0, 2)`` with
    ``<f|g> = int_0^2 f'g'``, truncated after ``N`` harmonics. The diagonal
    tail ``sum_{k>N} 1/(k pi)^2`` is below ``1 / (pi^2 N)``.
    """

    family = "Fourier"

    def __init__(self, n_terms=64):
        if int(n_terms) != n_terms or n_terms < 1:
            raise ParameterError(f"Fourier kernel needs n_terms >= 1, got {n_terms!r}")
        self.n_terms = int(n_terms)
        self.domain = ((0.0, 2.0),)

    def supports(self, order_s, order_t):
        # derivative evaluation is not continuous on H^1 beyond first order
        return order_s + order_t <= 1

    def _partial(self, s, t, a, b):
        x = np.asarray(s - t, dtype=float)
        k = np.arange(1, self.n_terms + 1) * pi
        phase = x[..., None] * k + (a + b) * pi / 2
        terms = (-1) ** b * k ** (a + b - 2) * np.cos(phase)
        return terms.sum(axis=-1), False

    def term(self, k, s, t):
        """The ``k``-th harmonic (1-based)."""
        x = np.asarray(s, dtype=float) - np.asarray(t, dtype=float)
        return np.cos(k * pi * x) / (k * pi) ** 2

    def to_dict(self):
        return {"family": self.family, "params": {"n_terms": self.n_terms}}


# ---------------------------------------------------------------------------
# finite dimensional polynomial kernels
# ---------------------------------------------------------------------------

def _check_increasing(nodes, name):
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 1:
        raise ParameterError(f"{name} must be a non-empty list of reals")
    if not np.all(np.isfinite(nodes)):
        raise ParameterError(f"{name} must be finite")
    if np.any(np.diff(nodes) <= 0):
        raise ParameterError(f"{name} must be strictly increasing")
    return nodes


def lagrange_basis(nodes, x):
    """Cardinal basis ``L_j(x)`` for ``nodes``; shape ``x.shape + (n,)``."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)[..., None]
    n = nodes.size
    out = np.ones(x.shape[:-1] + (n,))
    for k in range(n):
        factor = (x - nodes[k]) / np.where(nodes == nodes[k], 1.0, nodes - nodes[k])
        factor[..., k] = 1.0
        out *= factor
    return out


class LagrangeKernel(Kernel):
    """``H(s, t) = sum_j L_j(s) L_j(t)``: polynomials of degree ``<= n`` with
    the scalar product ``sum_j P(theta_j) Q(theta_j)``."""

    family = "Lagrange"

    def __init__(self, nodes):
        self.nodes = _check_increasing(nodes, "Lagrange nodes")
        self.domain = (REAL_LINE,)

    def _partial(self, s, t, a, b):
        return np.sum(lagrange_basis(self.nodes, s) * lagrange_basis(self.nodes, t), axis=-1), False

    def to_dict(self):
        return {"family": self.family, "params": {"nodes": self.nodes.tolist()}}


class Bernstein1Kernel(Kernel):
    """``H(s, t) = st + (1 - s)(1 - t)``: degree-one polynomials with
    ``<P|Q> = P(0)Q(0) + P(1)Q(1)``."""

    family = "Bernstein1"

    def __init__(self):
        self.domain = (REAL_LINE,)

    def _partial(self, s, t, a, b):
        return s * t + (1.0 - s) * (1.0 - t), False

    def second_difference(self, s, t, h, a, b):
        # affine in each slot
        return np.zeros(np.broadcast(s, t).shape), False

    def to_dict(self):
        return {"family": self.family, "params": {}}


# ---------------------------------------------------------------------------
# odd-degree spline kernel
# ---------------------------------------------------------------------------

class OddSplineKernel(Kernel):
    """Kernel of ``{f in H^m(a, b): f(theta_j) = 0}`` with
    ``<f|g> = int_a^b f^(m) g^(m)``.

    With ``E(x) = |x|^(2m-1) / (2 (2m-1)!)`` and ``P`` the Lagrange projector
    on the thetas acting in each argument::

        H = (-1)^m (I - P_s)(I - P_t) E(s - t)

    ``E`` differs from ``(s-t)_+^(2m-1) / (2m-1)!`` by a polynomial that the
    projectors annihilate, so both Green's functions give the same kernel;
    ``E`` is used because it is exactly symmetric.
    """

    family = "OddSpline"

    def __init__(self, m, thetas, interval=(0.0, 1.0)):
        if int(m) != m or m < 2:
            raise ParameterError(f"OddSpline kernel needs integer m >= 2, got {m!r}")
        self.m = int(m)
        lo, hi = (float(x) for x in interval)
        if not lo < hi:
            raise ParameterError("OddSpline interval must satisfy a < b")
        thetas = _check_increasing(thetas, "OddSpline thetas")
        if thetas.size != self.m:
            raise ParameterError(f"OddSpline needs exactly m={self.m} thetas, got {thetas.size}")
        if np.any(thetas <= lo) or np.any(thetas >= hi):
            raise ParameterError("OddSpline thetas must lie inside the open interval (a, b)")
        self.thetas = thetas
        self.interval = (lo, hi)
        self.domain = ((lo, hi),)
        self._p = 2 * self.m - 1
        basis = []
        for j in range(self.m):
            others = np.delete(thetas, j)
            poly = np.polynomial.Polynomial.fromroots(others)
            basis.append(poly / poly(thetas[j]))
        self._basis = basis
        self._e_theta = self._green(thetas[:, None] - thetas[None, :], 0)

    def supports(self, order_s, order_t):
        return order_s + order_t <= self._p

    def _green(self, x, k):
        """k-th derivative of ``E``; the sign at ``x = 0`` is taken as +1."""
        x = np.asarray(x, dtype=float)
        if k > self._p:
            return np.zeros_like(x)
        sign = np.where(x >= 0, 1.0, -1.0) ** k
        return sign * np.abs(x) ** (self._p - k) / (2.0 * factorial(self._p - k))

    def basis(self, x, order=0):
        x = np.asarray(x, dtype=float)
        return np.stack([p.deriv(order)(x) if order else p(x) for p in self._basis], axis=-1)

    def _partial(self, s, t, a, b):
        th = self.thetas
        ls, lt = self.basis(s, a), self.basis(t, b)
        direct = (-1) ** b * self._green(s - t, a + b)
        left = np.sum(ls * ((-1) ** b * self._green(th - t[..., None], b)), axis=-1)
        right = np.sum(lt * self._green(s[..., None] - th, a), axis=-1)
        both = np.einsum("...j,jk,...k->...", ls, self._e_theta, lt)
        value = (-1) ** self.m * (direct - left - right + both)
        kink = False
        if a + b == self._p:
            kink = s == t
        if b == self._p:
            kink = kink | np.any(t[..., None] == th, axis=-1)
        if a == self._p:
            kink = kink | np.any(s[..., None] == th, axis=-1)
        return value, kink

    def to_dict(self):
        return {
            "family": self.family,
            "params": {"m": self.m, "thetas": self.thetas.tolist(), "interval": list(self.interval)},
        }


# ---------------------------------------------------------------------------
# H^2(0, b) with f(0)g(0) + f'(0)g'(0) + int f''g'': the parts K and L
# ---------------------------------------------------------------------------

H2_PARTS = ("K", "L", "H")


class H2PartKernel(Kernel):
    """Parts of the kernel of ``H^2(0, b)`` under the mixed scalar product.

    ``K(s, t) = 1 + st`` reproduces affine functions with
    ``f(0)g(0) + f'(0)g'(0)``; ``L(s, t) = (s-t)_+^3/3! + s^2 t/2 - s^3/6``
    reproduces ``{f(0) = f'(0) = 0}`` with ``int f''g''``; ``H = K + L``.

    The formulas do not depend on the right end ``upper``; it defaults to 1
    and may be enlarged when shifted evaluations need room.
    """

    family = "H2Part"

    def __init__(self, part="L", upper=1.0):
        if part not in H2_PARTS:
            raise ParameterError(f"H2Part part must be one of {H2_PARTS}, got {part!r}")
        upper = float(upper)
        if not upper > 0:
            raise ParameterError("H2Part upper end must be positive")
        self.part = part
        self.upper = upper
        self.domain = ((0.0, upper),)

    def supports(self, order_s, order_t):
        if self.part == "K":
            return True
        return order_s <= 2 and order_t <= 2 and order_s + order_t <= 3

    @staticmethod
    def _k(s, t, a, b):
        shape = np.broadcast(s, t).shape
        if a > 1 or b > 1:
            return np.zeros(shape)
        fs = s if a == 0 else np.ones_like(s)
        ft = t if b == 0 else np.ones_like(t)
        return (1.0 if a == b == 0 else 0.0) + fs * ft

    @staticmethod
    def _l(s, t, a, b):
        x = s - t
        value = (-1) ** b * truncated_power(x, 3 - a - b)
        ds2 = (s * s, 2 * s, 2.0 * np.ones_like(s))[a]
        dt1 = (t, np.ones_like(t), np.zeros_like(t))[b]
        value = value + 0.5 * ds2 * dt1
        if b == 0:
            value = value - (s**3 / 6.0, 0.5 * s * s, s)[a]
        kink = (x == 0) if a + b == 3 else False
        return value, kink

    def _partial(self, s, t, a, b):
        if self.part == "K":
            return self._k(s, t, a, b), False
        value, kink = self._l(s, t, a, b)
        if self.part == "H":
            value = value + self._k(s, t, a, b)
        return value, kink

    def second_difference(self, s, t, h, a, b):
        # K is affine in each slot and the polynomial terms of L are affine
        # in t or free of t, so only (s - t)_+^3 / 6 survives: its fourth
        # difference is h^3 times the centred cubic B-spline in (s - t) / h
        shape = np.broadcast(s, t).shape
        if self.part == "K":
            return np.zeros(shape), False
        value, kink = cubic_bspline((s - t) / h, a + b)
        return (-1) ** b * value / h ** (1 + a + b), kink

    def describe(self):
        return f"H2Part-{self.part}"

    def to_dict(self):
        return {"family": self.family, "params": {"part": self.part, "upper": self.upper}}


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

FAMILIES = {
    "Polynomial": PolynomialKernel,
    "Taylor": TaylorKernel,
    "Spline01": Spline01Kernel,
    "Fourier": FourierKernel,
    "Lagrange": LagrangeKernel,
    "Bernstein1": Bernstein1Kernel,
    "OddSpline": OddSplineKernel,
    "H2Part": H2PartKernel,
}


def construct_kernel(family, params=None):
    """Build a kernel from its family name and parameter mapping.

    >>> construct_kernel("Polynomial", {"m": 1, "t0": 0.0})(2.0, 3.0)
    7.0
    """
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ParameterError(
            f"unknown kernel family {family!r}; expected one of {sorted(FAMILIES)}"
        ) from None
    params = dict(params or {})
    try:
        return cls(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {family}: {exc}") from None


def eval_kernel(k: Kernel, s, t):
    return k.eval(s, t)


def eval_kernel_partial(k: Kernel, s, t, order_s=0, order_t=0, return_kink=False):
    return k.partial(s, t, order_s, order_t, return_kink=return_kink)
