import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import neville
from rkhs_interp.algebra import scale_kernel, tensor_kernel
from rkhs_interp.engine import (
    Functional,
    InterpolationProblem,
    apply_functional_to_kernel,
    assemble_gram,
    cross_gram,
    eval_interpolant,
    interpolant_from_dict,
    interpolant_norm_sq,
    problem_from_dict,
    solve_min_norm,
    verify_constraints,
)
from rkhs_interp.errors import (
    CapabilityError,
    DomainError,
    InfeasibleError,
    ParameterError,
    RankDeficiencyError,
)
from rkhs_interp.kernels import (
    Bernstein1Kernel,
    FourierKernel,
    H2PartKernel,
    LagrangeKernel,
    OddSplineKernel,
    PolynomialKernel,
    Spline01Kernel,
    TaylorKernel,
    lagrange_basis,
)
from rkhs_interp.numerics import QuadratureRule, integrate

PE = Functional.point_eval
DE = Functional.deriv_eval


def point_problem(kernel, points, targets):
    return InterpolationProblem(kernel, [PE(x) for x in points], targets)


class TestApplyFunctional:
    def test_point_eval_spline01(self):
        t = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(apply_functional_to_kernel(PE(0.35), Spline01Kernel(), t),
                                      np.minimum(0.35, t))

    def test_derivative_polynomial(self):
        t = np.linspace(-1, 1, 7)
        np.testing.assert_allclose(apply_functional_to_kernel(DE(0.0, 1), PolynomialKernel(1), t), t)

    def test_point_eval_lagrange(self):
        nodes = [0.0, 0.3, 0.5, 1.0]
        t = np.linspace(-0.2, 1.2, 15)
        for i, th in enumerate(nodes):
            cardinal = neville(nodes, np.eye(4)[i], t)
            np.testing.assert_allclose(apply_functional_to_kernel(PE(th), LagrangeKernel(nodes), t),
                                       cardinal, atol=1e-13)

    def test_unsupported(self):
        with pytest.raises(CapabilityError):
            apply_functional_to_kernel(DE(0.5, 2), Spline01Kernel(), 0.3)


class TestGram:
    def test_lagrange_identity(self):
        nodes = [-1.0, 0.0, 0.5, 2.0]
        G = assemble_gram(point_problem(LagrangeKernel(nodes), nodes, np.zeros(4))).entries
        np.testing.assert_allclose(G, np.eye(4), atol=1e-14)

    def test_spline01_hand_checked(self):
        G = assemble_gram(point_problem(Spline01Kernel(), [0.25, 0.5, 1.0], np.zeros(3))).entries
        np.testing.assert_array_equal(G, [[0.25, 0.25, 0.25], [0.25, 0.5, 0.5], [0.25, 0.5, 1.0]])

    def test_taylor_derivatives_identity(self):
        p = InterpolationProblem(TaylorKernel(30, t0=0.0), [PE(0.0), DE(0.0, 1), DE(0.0, 2)], np.zeros(3))
        np.testing.assert_allclose(assemble_gram(p).entries, np.eye(3), atol=1e-15)

    def test_mixed_orders_symmetric(self, rng):
        k = H2PartKernel("H")
        fs = [PE(0.1), DE(0.4, 1), PE(0.7), DE(0.2, 1), DE(0.9, 1)]
        G = cross_gram(k, fs, fs)
        assert np.max(np.abs(G - G.T)) <= 1e-12
        assert np.linalg.eigvalsh(G).min() > 0

    def test_factor_reconstructs(self):
        p = point_problem(Spline01Kernel(), [0.1, 0.4, 0.8], [1.0, 2.0, 0.5])
        i = solve_min_norm(p)
        L = i.gram.factor
        G = i.gram.entries + i.jitter_used * np.eye(3)
        np.testing.assert_allclose(L @ L.T, G, atol=1e-10)


class TestProblemValidation:
    def test_length_mismatch(self):
        with pytest.raises(ParameterError, match="targets"):
            InterpolationProblem(Spline01Kernel(), [PE(0.5)], [1.0, 2.0])

    def test_duplicate_functionals(self):
        with pytest.raises(ParameterError, match="coincide"):
            point_problem(Spline01Kernel(), [0.5, 0.2, 0.5], [1.0, 2.0, 3.0])

    def test_point_and_derivative_at_same_point_are_distinct(self):
        p = InterpolationProblem(PolynomialKernel(3), [PE(0.5), DE(0.5, 1)], [1.0, 0.0])
        assert p.size == 2

    def test_out_of_domain(self):
        with pytest.raises(DomainError):
            point_problem(Spline01Kernel(), [0.5, 1.5], [0.0, 0.0])

    def test_unsupported_order(self):
        with pytest.raises(CapabilityError):
            InterpolationProblem(Spline01Kernel(), [DE(0.5, 1)], [1.0])

    def test_non_finite_target(self):
        with pytest.raises(ParameterError):
            point_problem(Spline01Kernel(), [0.5], [np.nan])

    def test_point_eval_with_order(self):
        with pytest.raises(ParameterError):
            Functional("PointEval", 0.3, 1)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            Functional("Integral", 0.3)


class TestSolve:
    def test_identity_gram(self, rng):
        nodes = [0.0, 0.25, 0.6, 1.0]
        alpha = rng.normal(size=4)
        i = solve_min_norm(point_problem(LagrangeKernel(nodes), nodes, alpha))
        np.testing.assert_allclose(i.lambdas, alpha, atol=1e-14)
        assert np.max(np.abs(verify_constraints(i))) <= 1e-14

    def test_lagrange_is_classical_polynomial(self, rng):
        nodes = np.array([-0.4, 0.1, 0.3, 0.9, 1.3])
        alpha = rng.normal(size=5)
        i = solve_min_norm(point_problem(LagrangeKernel(nodes), nodes, alpha))
        t = np.linspace(-0.5, 1.5, 41)
        np.testing.assert_allclose(i(t), lagrange_basis(nodes, t) @ alpha, atol=1e-12)
        np.testing.assert_allclose(i(t), neville(nodes, alpha, t), atol=1e-12)

    def test_quadratic_example(self):
        i = solve_min_norm(point_problem(LagrangeKernel([0, 0.5, 1]), [0, 0.5, 1], [1.0, 0.0, 1.0]))
        expected = float(neville([0, 0.5, 1], [1.0, 0.0, 1.0], 0.25))
        assert eval_interpolant(i, 0.25) == pytest.approx(expected, abs=1e-14)
        assert expected == pytest.approx(0.25, abs=1e-15)

    def test_spline01_single_constraint(self):
        i = solve_min_norm(point_problem(Spline01Kernel(), [1.0], [1.0]))
        np.testing.assert_allclose(i.lambdas, [1.0])
        t = np.linspace(0, 1, 9)
        np.testing.assert_allclose(i(t), t, atol=1e-15)

    def test_hermite_cubic(self):
        p = InterpolationProblem(
            PolynomialKernel(3), [PE(0.0), DE(0.0, 1), PE(1.0), DE(1.0, 1)], [1.0, 0.0, 0.0, 0.0]
        )
        i = solve_min_norm(p)
        t = np.linspace(-0.5, 1.5, 21)
        np.testing.assert_allclose(i(t), 1 - 3 * t**2 + 2 * t**3, atol=1e-12)
        np.testing.assert_allclose(i(t, order=1), -6 * t + 6 * t**2, atol=1e-12)

    def test_zero_targets(self):
        i = solve_min_norm(point_problem(Spline01Kernel(), [0.2, 0.6], [0.0, 0.0]))
        np.testing.assert_array_equal(i(np.linspace(0, 1, 5)), np.zeros(5))
        assert interpolant_norm_sq(i) == 0.0

    def test_norm_identity_gram(self):
        i = solve_min_norm(point_problem(LagrangeKernel([0.0, 1.0]), [0.0, 1.0], [3.0, 4.0]))
        assert interpolant_norm_sq(i) == pytest.approx(25.0, abs=1e-12)

    def test_norm_equals_lambda_dot_alpha(self, rng):
        x = np.sort(rng.uniform(0, 1, 6))
        alpha = rng.normal(size=6)
        i = solve_min_norm(point_problem(Spline01Kernel(), x, alpha))
        assert i.norm_sq() == pytest.approx(float(i.lambdas @ alpha), rel=1e-10)

    def test_norm_equals_energy_integral(self, rng):
        x = np.sort(rng.uniform(0.05, 1, 6))
        i = solve_min_norm(point_problem(Spline01Kernel(), x, rng.normal(size=6)))
        rule = QuadratureRule(2000, split_points=tuple(x))
        energy = integrate(lambda t: i(t, order=1) ** 2, 0.0, 1.0, rule)
        assert energy == pytest.approx(i.norm_sq(), rel=1e-10)

    def test_random_spline01_residuals(self, rng):
        x = rng.uniform(0, 1, 8)
        i = solve_min_norm(point_problem(Spline01Kernel(), x, rng.normal(size=8)))
        assert np.max(np.abs(verify_constraints(i))) <= 1e-8

    def test_jitter_reported(self):
        x = np.linspace(0, 1, 25)
        i = solve_min_norm(point_problem(TaylorKernel(30), x, np.sin(x)))
        assert i.jitter_used > 0
        assert np.max(np.abs(verify_constraints(i))) <= 1e-6

    def test_rank_deficiency_pivot(self):
        p = point_problem(scale_kernel(0.0, Spline01Kernel()), [0.2, 0.6], [1.0, 1.0])
        with pytest.raises(RankDeficiencyError) as info:
            solve_min_norm(p, jitter_schedule=(0.0,))
        assert info.value.pivot == 0

    def test_infeasible_target_at_theta(self):
        k = OddSplineKernel(2, [0.25, 0.75])
        p = point_problem(k, [0.1, 0.25, 0.5], [1.0, 1.0, 0.0])
        with pytest.raises(InfeasibleError) as info:
            solve_min_norm(p)
        assert info.value.pivot == 1
        assert isinstance(info.value, RankDeficiencyError)

    def test_zero_target_at_theta_is_feasible(self):
        k = OddSplineKernel(2, [0.25, 0.75])
        i = solve_min_norm(point_problem(k, [0.1, 0.25, 0.5], [1.0, 0.0, 0.3]))
        assert np.max(np.abs(verify_constraints(i))) <= 1e-6

    def test_tensor_domain_problem(self):
        k = tensor_kernel(Bernstein1Kernel(), Bernstein1Kernel())
        corners = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        i = solve_min_norm(point_problem(k, corners, [1.0, 2.0, 3.0, 4.0]))
        assert i((0.5, 0.5)) == pytest.approx(2.5, abs=1e-14)
        assert i(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx([2.0, 3.0], abs=1e-14)


def corrected_perturbation(kernel, constraints, lambdas_like, rng, lo, hi, n_extra=4):
    """Random v in the span of kernel sections with all constraint
    functionals vanishing on v; returns its coefficient vector over
    ``constraints + extra`` and the extra functionals."""
    extra = [PE(u) for u in rng.uniform(lo, hi, n_extra)]
    c = rng.normal(size=n_extra)
    G = cross_gram(kernel, constraints, constraints)
    A = cross_gram(kernel, constraints, extra)
    mu = np.linalg.solve(G, A @ c)
    return np.concatenate([-mu, c]), extra


@pytest.mark.parametrize(
    "kernel, lo, hi",
    [(Spline01Kernel(), 0.0, 1.0), (H2PartKernel("H"), 0.0, 1.0), (FourierKernel(32), 0.0, 2.0)],
    ids=["Spline01", "H2Part-H", "Fourier"],
)
def test_minimum_norm_and_orthogonality(kernel, lo, hi, rng):
    x = np.sort(rng.uniform(lo, hi, 5))
    sigma = solve_min_norm(point_problem(kernel, x, rng.normal(size=5)))
    cons = list(sigma.problem.functionals)
    for _ in range(100):
        coef, extra = corrected_perturbation(kernel, cons, sigma.lambdas, rng, lo, hi)
        allf = cons + extra
        M = cross_gram(kernel, allf, allf)
        # constraints vanish on v
        v_on_cons = cross_gram(kernel, cons, allf) @ coef
        assert np.max(np.abs(v_on_cons)) <= 1e-9
        assert float(sigma.lambdas @ v_on_cons) == pytest.approx(0.0, abs=1e-9)
        g = coef + np.concatenate([sigma.lambdas, np.zeros(len(extra))])
        assert g @ M @ g >= sigma.norm_sq() - 1e-9


@given(c=st.floats(-1e3, 1e3, allow_nan=False))
@settings(max_examples=40, deadline=None)
def test_scaling_equivariance(c):
    x = [0.1, 0.35, 0.6, 0.95]
    alpha = np.array([0.3, -1.0, 2.0, 0.5])
    k = H2PartKernel("H")
    base = solve_min_norm(point_problem(k, x, alpha))
    scaled = solve_min_norm(point_problem(k, x, c * alpha))
    tol = 1e-9 * max(1.0, abs(c))
    np.testing.assert_allclose(scaled.lambdas, c * base.lambdas, atol=tol * np.abs(base.lambdas).max())
    t = np.linspace(0, 1, 21)
    np.testing.assert_allclose(scaled(t), c * base(t), atol=tol)


def test_permutation_invariance(rng):
    k = H2PartKernel("H")
    fs = [PE(0.1), DE(0.4, 1), PE(0.7), DE(0.2, 1), PE(0.95)]
    alpha = rng.normal(size=5)
    t = np.linspace(0, 1, 33)
    base = solve_min_norm(InterpolationProblem(k, fs, alpha))(t)
    for _ in range(10):
        perm = rng.permutation(5)
        other = solve_min_norm(InterpolationProblem(k, [fs[j] for j in perm], alpha[perm]))(t)
        np.testing.assert_allclose(other, base, atol=1e-12)


class TestJson:
    def test_problem_round_trip(self):
        p = InterpolationProblem(H2PartKernel("H"), [PE(0.1), DE(0.4, 1)], [1.0, -2.0])
        d = json.loads(json.dumps(p.to_dict()))
        q = problem_from_dict(d)
        assert q.functionals == p.functionals
        np.testing.assert_array_equal(q.targets, p.targets)

    def test_interpolant_round_trip(self, rng):
        p = point_problem(FourierKernel(16), [0.2, 0.9, 1.7], rng.normal(size=3))
        i = solve_min_norm(p)
        j = interpolant_from_dict(json.loads(json.dumps(i.to_dict())))
        t = np.linspace(0, 2, 17)
        np.testing.assert_array_equal(j(t), i(t))

    def test_tensor_round_trip(self):
        k = tensor_kernel(PolynomialKernel(1), PolynomialKernel(2))
        p = InterpolationProblem(k, [PE((0.0, 1.0)), DE((0.5, 0.5), (1, 0))], [1.0, 2.0])
        q = problem_from_dict(json.loads(json.dumps(p.to_dict())))
        assert q.functionals == p.functionals

    def test_constraint_list_with_kernel(self):
        q = problem_from_dict([{"point": 0.5, "target": 1.0}, {"point": 0.2, "order": 1, "target": 0.0}],
                              kernel=PolynomialKernel(2))
        assert [f.kind for f in q.functionals] == ["PointEval", "DerivEval"]

    @pytest.mark.parametrize(
        "data, needle",
        [
            ({"constraints": [{"point": 0.5, "target": 1}]}, "kernel"),
            ({"kernel": {"family": "Spline01"}, "constraints": []}, "constraints"),
            ({"kernel": {"family": "Spline01"}, "constraints": [{"point": 0.5}]}, "target"),
            ({"kernel": {"family": "Spline01"}, "constraints": [{"target": 0.5}]}, "point"),
            ("nope", "JSON object"),
        ],
    )
    def test_malformed(self, data, needle):
        with pytest.raises(ParameterError, match=needle):
            problem_from_dict(data)


def test_second_derivative_functional_rejected_in_h2():
    # f -> f''(t) is not continuous on H^2
    with pytest.raises(CapabilityError):
        InterpolationProblem(H2PartKernel("H"), [PE(0.1), DE(0.2, 2)], [0.0, 1.0])
