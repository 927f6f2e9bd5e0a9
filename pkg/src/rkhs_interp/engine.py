"""Minimum-norm interpolation in a reproducing kernel Hilbert space.

Given a kernel ``H`` and continuous functionals ``k_0..k_n`` (point or
derivative evaluations), the element of least norm with ``k_j(f) = alpha_j``
is ``sigma = sum_j lambda_j k_j(H(., t))`` where ``G lambda = alpha`` and
``G_ij = k_i k_j H``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .algebra import kernel_from_dict
from .errors import CapabilityError, InfeasibleError, ParameterError, RankDeficiencyError
from .kernels import Kernel, _normalize_order
from .numerics import JITTER_SCHEDULE, factor_solve

logger = logging.getLogger(__name__)

SOLVE_RTOL = 1e-8
JITTERED_RTOL = 1e-6

POINT_EVAL = "PointEval"
DERIV_EVAL = "DerivEval"


def _freeze_point(point):
    if isinstance(point, (list, tuple, np.ndarray)):
        point = tuple(float(x) for x in np.ravel(point))
        return point[0] if len(point) == 1 else point
    return float(point)


def _freeze_order(order):
    if isinstance(order, (list, tuple, np.ndarray)):
        order = tuple(int(o) for o in np.ravel(order))
        return order[0] if len(order) == 1 else order
    return int(order)


def _is_zero(order):
    return order == 0 or (isinstance(order, tuple) and not any(order))


@dataclass(frozen=True)
class Functional:
    """A point evaluation or a derivative evaluation at ``point``."""

    kind: str
    point: float | tuple
    order: int | tuple = 0

    def __post_init__(self):
        if self.kind not in (POINT_EVAL, DERIV_EVAL):
            raise ParameterError(f"unknown functional kind {self.kind!r}")
        object.__setattr__(self, "point", _freeze_point(self.point))
        object.__setattr__(self, "order", _freeze_order(self.order))
        if self.kind == POINT_EVAL and not _is_zero(self.order):
            raise ParameterError("PointEval functionals have order 0")
        orders = self.order if isinstance(self.order, tuple) else (self.order,)
        if any(o < 0 for o in orders):
            raise ParameterError("derivative orders must be nonnegative")

    @classmethod
    def point_eval(cls, point):
        return cls(POINT_EVAL, point, 0)

    @classmethod
    def deriv_eval(cls, point, order):
        return cls(DERIV_EVAL, point, order)

    def to_dict(self):
        point = list(self.point) if isinstance(self.point, tuple) else self.point
        order = list(self.order) if isinstance(self.order, tuple) else self.order
        return {"kind": self.kind, "point": point, "order": order}


def _key(functional, kernel):
    return (_normalize_order(functional.order, kernel.ndim), np.asarray(functional.point, dtype=float))


@dataclass(frozen=True)
class InterpolationProblem:
    """Kernel, constraint functionals and their target values."""

    kernel: Kernel
    functionals: tuple
    targets: np.ndarray

    def __post_init__(self):
        functionals = tuple(self.functionals)
        targets = np.asarray(self.targets, dtype=float).ravel()
        if len(functionals) != targets.size:
            raise ParameterError(
                f"{len(functionals)} functionals but {targets.size} targets"
            )
        if not np.all(np.isfinite(targets)):
            raise ParameterError("targets must be finite")
        seen = {}
        for i, f in enumerate(functionals):
            if not isinstance(f, Functional):
                raise ParameterError(f"constraint {i} is not a Functional")
            order, point = _key(f, self.kernel)
            self.kernel.check_points(point)
            if not self.kernel.supports(order, order):
                raise CapabilityError(
                    f"{self.kernel.describe()} cannot apply derivative functional of order {order}"
                )
            ident = (order, tuple(np.ravel(point)))
            if ident in seen:
                raise ParameterError(
                    f"functionals {seen[ident]} and {i} coincide; the system is not free"
                )
            seen[ident] = i
        object.__setattr__(self, "functionals", functionals)
        object.__setattr__(self, "targets", targets)

    @property
    def size(self):
        return len(self.functionals)

    def to_dict(self):
        return {
            "kernel": self.kernel.to_dict(),
            "constraints": [
                {**f.to_dict(), "target": float(a)} for f, a in zip(self.functionals, self.targets)
            ],
        }


@dataclass
class GramMatrix:
    entries: np.ndarray
    jitter_used: float = 0.0
    factor: np.ndarray | None = None


def cross_gram(kernel: Kernel, rows, cols) -> np.ndarray:
    """``M_ij = row_i (first slot) col_j (second slot) applied to H``.

    Functionals sharing a derivative order are evaluated in one vectorized
    kernel call.
    """
    out = np.empty((len(rows), len(cols)))
    row_groups = _group(kernel, rows)
    col_groups = _group(kernel, cols)
    for a, (ri, rp) in row_groups.items():
        for b, (ci, cp) in col_groups.items():
            if kernel.ndim == 1:
                block = kernel.partial(rp[:, None], cp[None, :], a, b)
            else:
                block = kernel.partial(rp[:, None, :], cp[None, :, :], a, b)
            out[np.ix_(ri, ci)] = block
    return out


def _group(kernel, functionals):
    groups = {}
    for i, f in enumerate(functionals):
        order, point = _key(f, kernel)
        groups.setdefault(order, ([], []))
        groups[order][0].append(i)
        groups[order][1].append(point)
    return {o: (np.array(idx), np.array(pts, dtype=float)) for o, (idx, pts) in groups.items()}


def apply_functional_to_kernel(f: Functional, k: Kernel, t):
    """Value at ``t`` of the representer of ``f``: ``f`` applied to ``H(., t)``
    in the first slot."""
    order, point = _key(f, k)
    return k.partial(point, t, order, 0)


def assemble_gram(p: InterpolationProblem) -> GramMatrix:
    G = cross_gram(p.kernel, p.functionals, p.functionals)
    return GramMatrix(entries=0.5 * (G + G.T))


@dataclass
class Interpolant:
    """Solution ``sigma = sum_j lambda_j k_j(H(., t))`` of a problem."""

    problem: InterpolationProblem
    lambdas: np.ndarray
    jitter_used: float = 0.0
    gram: GramMatrix | None = field(default=None, repr=False)

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float).ravel()
        if self.lambdas.size != self.problem.size:
            raise ParameterError("one coefficient per functional is required")
        if self.gram is None:
            self.gram = assemble_gram(self.problem)

    @property
    def kernel(self):
        return self.problem.kernel

    def __call__(self, t, order=0):
        """Evaluate ``sigma`` (or its derivative of ``order``) at ``t``."""
        k = self.kernel
        t = np.asarray(t, dtype=float)
        order = _normalize_order(order, k.ndim)
        shape = t.shape if k.ndim == 1 else t.shape[:-1]
        flat = t.reshape(-1) if k.ndim == 1 else t.reshape(-1, k.ndim)
        total = np.zeros(flat.shape[0])
        for a, (idx, pts) in _group(k, self.problem.functionals).items():
            if k.ndim == 1:
                block = k.partial(pts[:, None], flat[None, :], a, order)
            else:
                block = k.partial(pts[:, None, :], flat[None, :, :], a, order)
            total += self.lambdas[idx] @ np.atleast_2d(block)
        total = total.reshape(shape)
        return float(total) if total.ndim == 0 else total

    def apply(self, functionals):
        """Apply each functional to ``sigma``."""
        return cross_gram(self.kernel, functionals, self.problem.functionals) @ self.lambdas

    def residuals(self):
        return self.apply(self.problem.functionals) - self.problem.targets

    def norm_sq(self):
        G = self.gram.entries
        return max(float(self.lambdas @ G @ self.lambdas), 0.0)

    def to_dict(self):
        return {
            "problem": self.problem.to_dict(),
            "lambdas": self.lambdas.tolist(),
            "jitter_used": self.jitter_used,
        }


def _relative_residual(G, x, alpha):
    return np.abs(G @ x - alpha) / np.maximum(1.0, np.abs(alpha))


def solve_min_norm(p: InterpolationProblem, jitter_schedule=JITTER_SCHEDULE) -> Interpolant:
    """Minimum-norm interpolant of ``p``.

    Jitter levels are tried in order; a level is accepted once the unshifted
    system is met to ``1e-8`` relative. If no level reaches that, the best
    factorizable level is accepted when within ``1e-6``.

    Raises
    ------
    RankDeficiencyError
        No jitter level factorizes the Gram matrix.
    InfeasibleError
        Factorizations succeed but the constraints cannot be met, e.g. a
        nonzero target where every element of the space vanishes.
    """
    gram = assemble_gram(p)
    G, alpha = gram.entries, p.targets
    best = None
    failure = None
    for i, jitter in enumerate(jitter_schedule):
        try:
            x, used, factor = factor_solve(G, alpha, (jitter,))
        except RankDeficiencyError as exc:
            failure = exc
            continue
        res = _relative_residual(G, x, alpha)
        if best is None or res.max() < best[0].max():
            best = (res, x, used, factor)
        if res.max() <= SOLVE_RTOL:
            break
    if best is None:
        raise RankDeficiencyError(
            f"Gram matrix is numerically singular beyond jitter {jitter_schedule[-1]:g}; "
            f"the functionals are not a free system (pivot {failure.pivot})",
            pivot=failure.pivot,
        )
    res, x, used, factor = best
    if res.max() > JITTERED_RTOL:
        worst = int(np.argmax(res))
        raise InfeasibleError(
            f"constraint {worst} cannot be satisfied (relative residual {res[worst]:.3g})",
            pivot=worst,
        )
    if used > 0:
        logger.info("Gram solve needed jitter %g", used)
    gram.jitter_used, gram.factor = used, factor
    return Interpolant(problem=p, lambdas=x, jitter_used=used, gram=gram)


def eval_interpolant(i: Interpolant, t):
    return i(t)


def interpolant_norm_sq(i: Interpolant) -> float:
    return i.norm_sq()


def verify_constraints(i: Interpolant) -> np.ndarray:
    """Residuals ``k_j(sigma) - alpha_j``."""
    return i.residuals()


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

def functional_from_dict(d) -> Functional:
    if not isinstance(d, dict):
        raise ParameterError("constraint must be a JSON object")
    if "point" not in d:
        raise ParameterError("constraint needs field 'point'")
    order = d.get("order", 0)
    kind = d.get("kind", DERIV_EVAL if not _is_zero(_freeze_order(order)) else POINT_EVAL)
    return Functional(kind, d["point"], order)


def problem_from_dict(d, kernel: Kernel | None = None) -> InterpolationProblem:
    """Parse ``{"kernel": ..., "constraints": [{"kind","point","order","target"}]}``.

    ``kernel`` overrides (or supplies) the kernel field.
    """
    if isinstance(d, list):
        d = {"constraints": d}
    if not isinstance(d, dict):
        raise ParameterError("problem must be a JSON object")
    if kernel is None:
        if "kernel" not in d:
            raise ParameterError("problem needs field 'kernel'")
        kernel = kernel_from_dict(d["kernel"])
    constraints = d.get("constraints")
    if not isinstance(constraints, list) or not constraints:
        raise ParameterError("problem needs a non-empty list field 'constraints'")
    functionals, targets = [], []
    for c in constraints:
        functionals.append(functional_from_dict(c))
        if "target" not in c:
            raise ParameterError("constraint needs field 'target'")
        targets.append(c["target"])
    return InterpolationProblem(kernel, tuple(functionals), np.asarray(targets, dtype=float))


def interpolant_from_dict(d) -> Interpolant:
    if not isinstance(d, dict) or "problem" not in d or "lambdas" not in d:
        raise ParameterError("interpolant needs fields 'problem' and 'lambdas'")
    problem = problem_from_dict(d["problem"])
    return Interpolant(problem, np.asarray(d["lambdas"], dtype=float), float(d.get("jitter_used", 0.0)))
