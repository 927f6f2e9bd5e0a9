"""Combinators producing new reproducing kernels from existing ones."""

from __future__ import annotations

from math import comb

import numpy as np

from .errors import DomainError, ParameterError
from .kernels import Kernel, construct_kernel


def _intersect(k1, k2, opname):
    if k1.ndim != k2.ndim:
        raise DomainError(f"{opname}: operands have {k1.ndim} and {k2.ndim} coordinates")
    out = []
    for (a1, b1), (a2, b2) in zip(k1.domain, k2.domain):
        lo, hi = max(a1, a2), min(b1, b2)
        if not lo < hi:
            raise DomainError(f"{opname}: operand domains [{a1}, {b1}] and [{a2}, {b2}] are disjoint")
        out.append((lo, hi))
    return tuple(out)


class CompositeKernel(Kernel):
    """Base for kernels built by an operation on other kernels."""

    op: str = ""
    operands: tuple = ()

    def describe(self):
        return f"{self.op}({', '.join(k.describe() for k in self.operands)})"


class ScaledKernel(CompositeKernel):
    op = "scale"

    def __init__(self, lam, k):
        lam = float(lam)
        if not lam >= 0:
            raise ParameterError(f"scale factor must be >= 0 to keep positivity, got {lam}")
        self.lam = lam
        self.operands = (k,)
        self.domain = k.domain

    def supports(self, order_s, order_t):
        return self.operands[0].supports(order_s, order_t)

    def _partial(self, s, t, a, b):
        value, kink = self.operands[0].partial(s, t, a, b, return_kink=True)
        return self.lam * value, kink

    def second_difference(self, s, t, h, a, b):
        exact = self.operands[0].second_difference(s, t, h, a, b)
        if exact is None:
            return None
        return self.lam * exact[0], exact[1]

    def to_dict(self):
        return {"op": self.op, "lambda": self.lam, "args": [self.operands[0].to_dict()]}


class SumKernel(CompositeKernel):
    op = "add"

    def __init__(self, k1, k2):
        self.domain = _intersect(k1, k2, "add")
        self.operands = (k1, k2)

    def supports(self, order_s, order_t):
        return all(k.supports(order_s, order_t) for k in self.operands)

    def _partial(self, s, t, a, b):
        v1, m1 = self.operands[0].partial(s, t, a, b, return_kink=True)
        v2, m2 = self.operands[1].partial(s, t, a, b, return_kink=True)
        return v1 + v2, m1 | m2

    def second_difference(self, s, t, h, a, b):
        parts = [k.second_difference(s, t, h, a, b) for k in self.operands]
        if any(p is None for p in parts):
            return None
        return parts[0][0] + parts[1][0], np.asarray(parts[0][1]) | np.asarray(parts[1][1])

    def to_dict(self):
        return {"op": self.op, "args": [k.to_dict() for k in self.operands]}


def _split_points(x, n1):
    return (x[..., 0], x[..., 1:]) if n1 == 1 else (x[..., :n1], x[..., n1:])


def _split_order(order, n1, n2):
    o1, o2 = order[:n1], order[n1:]
    return (o1[0] if n1 == 1 else o1), (o2[0] if n2 == 1 else o2)


class TensorKernel(CompositeKernel):
    """``H((s, s'), (t, t')) = H1(s, t) H2(s', t')`` on the product domain."""

    op = "tensor"

    def __init__(self, k1, k2):
        self.operands = (k1, k2)
        self.domain = tuple(k1.domain) + tuple(k2.domain)

    def _parts(self, x):
        k1, k2 = self.operands
        first, rest = _split_points(x, k1.ndim)
        if k2.ndim == 1:
            rest = rest[..., 0]
        return first, rest

    def supports(self, order_s, order_t):
        k1, k2 = self.operands
        s1, s2 = _split_order(order_s, k1.ndim, k2.ndim)
        t1, t2 = _split_order(order_t, k1.ndim, k2.ndim)
        return k1.supports(s1, t1) and k2.supports(s2, t2)

    def _partial(self, s, t, a, b):
        k1, k2 = self.operands
        s1, s2 = self._parts(s)
        t1, t2 = self._parts(t)
        a1, a2 = _split_order(a, k1.ndim, k2.ndim)
        b1, b2 = _split_order(b, k1.ndim, k2.ndim)
        v1, m1 = k1.partial(s1, t1, a1, b1, return_kink=True)
        v2, m2 = k2.partial(s2, t2, a2, b2, return_kink=True)
        return v1 * v2, m1 | m2

    def to_dict(self):
        return {"op": self.op, "args": [k.to_dict() for k in self.operands]}


class SchurKernel(CompositeKernel):
    """Pointwise product ``H1(s, t) H2(s, t)``; the tensor kernel restricted
    to the diagonal."""

    op = "schur"

    def __init__(self, k1, k2):
        self.domain = _intersect(k1, k2, "schur")
        self.operands = (k1, k2)

    def _terms(self, a, b):
        # Leibniz rule, one-dimensional orders only
        for i in range(a + 1):
            for j in range(b + 1):
                yield comb(a, i) * comb(b, j), (i, j), (a - i, b - j)

    def supports(self, order_s, order_t):
        if self.ndim != 1:
            return order_s == order_t == (0,) * self.ndim
        k1, k2 = self.operands
        return all(
            k1.supports(*o1) and k2.supports(*o2) for _, o1, o2 in self._terms(order_s, order_t)
        )

    def _partial(self, s, t, a, b):
        k1, k2 = self.operands
        if self.ndim != 1:
            v1, m1 = k1.partial(s, t, a, b, return_kink=True)
            v2, m2 = k2.partial(s, t, a, b, return_kink=True)
            return v1 * v2, m1 | m2
        total, kink = 0.0, False
        for c, o1, o2 in self._terms(a, b):
            v1, m1 = k1.partial(s, t, *o1, return_kink=True)
            v2, m2 = k2.partial(s, t, *o2, return_kink=True)
            total = total + c * v1 * v2
            kink = kink | m1 | m2
        return total, kink

    def to_dict(self):
        return {"op": self.op, "args": [k.to_dict() for k in self.operands]}


_SECOND_DIFF = (1.0, -2.0, 1.0)


class SecondDifferenceKernel(CompositeKernel):
    """Forward second differences with step ``h`` in both arguments::

        L_h(s, t) = h^-4 sum_{i,j in 0..2} c_i c_j L(s + (2-i) h, t + (2-j) h)

    with ``c = (1, -2, 1)``. Points are kept inside the operand's domain, so
    the result lives on ``[a, b - 2h]``.
    """

    op = "second_difference"

    def __init__(self, k, h):
        h = float(h)
        if not h > 0:
            raise ParameterError(f"second difference step must be positive, got {h}")
        if k.ndim != 1:
            raise ParameterError("second differences are defined for one-dimensional kernels")
        lo, hi = k.domain[0]
        if not hi - 2 * h > lo:
            raise DomainError(f"step h={h} leaves no room inside [{lo}, {hi}]")
        self.h = h
        self.operands = (k,)
        self.domain = ((lo, hi - 2 * h),)

    def supports(self, order_s, order_t):
        return self.operands[0].supports(order_s, order_t)

    def _partial(self, s, t, a, b):
        k, h = self.operands[0], self.h
        k.check_points(np.asarray(s) + 2 * h)
        k.check_points(np.asarray(t) + 2 * h)
        exact = k.second_difference(s, t, h, a, b)
        if exact is not None:
            return exact
        total, kink = 0.0, False
        for i, ci in enumerate(_SECOND_DIFF):
            for j, cj in enumerate(_SECOND_DIFF):
                v, m = k.partial(s + (2 - i) * h, t + (2 - j) * h, a, b, return_kink=True)
                total = total + ci * cj * v
                kink = kink | m
        return total / h**4, kink

    def to_dict(self):
        return {"op": self.op, "h": self.h, "args": [self.operands[0].to_dict()]}


def scale_kernel(lam, k):
    return ScaledKernel(lam, k)


def add_kernels(k1, k2):
    return SumKernel(k1, k2)


def tensor_kernel(k1, k2):
    return TensorKernel(k1, k2)


def schur_product(k1, k2):
    return SchurKernel(k1, k2)


def second_difference_kernel(k, h):
    return SecondDifferenceKernel(k, h)


_OPS = {
    "scale": (1, lambda args, spec: ScaledKernel(_required(spec, "lambda"), *args)),
    "add": (2, lambda args, spec: SumKernel(*args)),
    "tensor": (2, lambda args, spec: TensorKernel(*args)),
    "schur": (2, lambda args, spec: SchurKernel(*args)),
    "second_difference": (1, lambda args, spec: SecondDifferenceKernel(*args, _required(spec, "h"))),
}


def _required(spec, key):
    if key not in spec:
        raise ParameterError(f"composite kernel {spec.get('op')!r} needs field {key!r}")
    return spec[key]


def kernel_from_dict(spec) -> Kernel:
    """Build a kernel from ``{"family", "params"}`` or nested
    ``{"op", "args", "lambda"?, "h"?}`` JSON data."""
    if not isinstance(spec, dict):
        raise ParameterError(f"kernel spec must be a JSON object, got {type(spec).__name__}")
    if "family" in spec:
        params = spec.get("params", {})
        if not isinstance(params, dict):
            raise ParameterError("kernel field 'params' must be an object")
        return construct_kernel(spec["family"], params)
    if "op" not in spec:
        raise ParameterError("kernel spec needs a 'family' or an 'op' field")
    op = spec["op"]
    if op not in _OPS:
        raise ParameterError(f"unknown kernel op {op!r}; expected one of {sorted(_OPS)}")
    arity, build = _OPS[op]
    args = spec.get("args")
    if not isinstance(args, list) or len(args) != arity:
        raise ParameterError(f"kernel op {op!r} needs field 'args' with {arity} kernel(s)")
    return build([kernel_from_dict(a) for a in args], spec)


def gram(k: Kernel, points) -> np.ndarray:
    """Point-evaluation Gram matrix ``[k(x_i, x_j)]``."""
    points = np.asarray(points, dtype=float)
    if k.ndim == 1:
        return np.asarray(k.eval(points[:, None], points[None, :]))
    return np.asarray(k.eval(points[:, None, :], points[None, :, :]))
