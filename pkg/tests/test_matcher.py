import math

import numpy as np
import pytest
from scipy.integrate import quad

from gupbic import (
    characteristic_roots,
    exact_constant_basis,
    nondimensionalize,
    residual,
)
from gupbic.basis import Side
from gupbic.errors import (
    InvalidConditionsError,
    NormalizationError,
    WrongPotentialError,
)
from gupbic.matcher import (
    Case,
    ConstraintSystem,
    assemble,
    bound_states,
    classify,
    conditions_for,
    decay_at,
    degrees_of_freedom,
    normalize,
    nullspace,
    point_zero,
    solve_harmonic,
    solve_linear,
    solve_well,
    vanish_on_ray,
    well_coefficients,
)
from gupbic.spectrum import well_special_energies
from gupbic.verification import harmonic_setup_for, linear_setup_for

E1_DIMLESS = 2.918779290241783


class TestClassify:
    def test_well_is_case_one(self):
        result = classify([point_zero(-1.0), point_zero(1.0)])
        assert result.case is Case.I
        assert result.predicted_dof == 2
        assert result.kbc_count == 2

    def test_linear_is_case_two(self):
        result = classify([point_zero(0.0), decay_at(Side.PLUS_INFINITY)])
        assert result.case is Case.II
        assert result.predicted_dof == 1

    def test_harmonic_is_case_three(self):
        result = classify([decay_at(Side.MINUS_INFINITY), decay_at(Side.PLUS_INFINITY)])
        assert result.case is Case.III
        assert result.predicted_dof == 2
        assert result.non_kbc_count == 0

    def test_non_kbc_reduces_count(self):
        result = classify(
            [point_zero(-1.0), point_zero(1.0), point_zero(0.0, is_key=False)]
        )
        assert result.case is Case.I
        assert result.predicted_dof == 1
        assert result.non_kbc_count == 1

    def test_rays_are_case_one(self):
        result = classify(
            [vanish_on_ray(Side.MINUS_INFINITY, -2.0), vanish_on_ray(Side.PLUS_INFINITY, 2.0)]
        )
        assert result.case is Case.I

    def test_single_point_is_unbound(self):
        assert classify([point_zero(0.0)]).case is Case.UNBOUND

    def test_empty_rejected(self):
        with pytest.raises(InvalidConditionsError):
            classify([])

    def test_overlapping_rays_rejected(self):
        with pytest.raises(InvalidConditionsError, match="empty interior"):
            classify(
                [vanish_on_ray(Side.MINUS_INFINITY, 1.0), vanish_on_ray(Side.PLUS_INFINITY, -1.0)]
            )


class TestAssemble:
    def test_well_matrix_values(self, well_problem):
        e = 5.0
        roots = characteristic_roots(well_problem.epsilon, e)
        basis = exact_constant_basis(roots)
        system = assemble(basis, conditions_for(well_problem), e)
        m = system.matrix_unscaled()
        mu, kap = roots.mu1, roots.kappa
        expected = np.array(
            [
                [math.exp(-mu), math.exp(mu), math.cos(kap), -math.sin(kap)],
                [math.exp(mu), math.exp(-mu), math.cos(kap), math.sin(kap)],
            ]
        )
        # rows are rescaled to unit max magnitude; compare directions
        for row, exp_row in zip(m, expected):
            scale = row[np.argmax(np.abs(exp_row))] / exp_row[np.argmax(np.abs(exp_row))]
            assert np.allclose(row, exp_row * scale, rtol=1e-12)

    def test_linear_rows_kill_growing_then_wall(self, linear_problem):
        dof, system = degrees_of_freedom(linear_problem, 2.0)
        assert dof == 1
        assert system.row_kinds[0] == "decay[+inf] kills C1"
        assert system.row_kinds[1] == "decay[+inf] kills C3"
        assert system.row_kinds[2].startswith("phi(0")

    def test_linear_nullvector_is_the_closed_form_ratio(self, linear_problem):
        from gupbic.matcher import wkb_assembly

        dof, system = degrees_of_freedom(linear_problem, 2.0)
        nullity, vecs = nullspace(system)
        assert nullity == 1
        v = vecs[0]
        assert abs(v[0]) < 1e-12 and abs(v[2]) < 1e-12
        asm = wkb_assembly(linear_problem, 2.0)
        lo = linear_problem.domain[0]
        expected_ratio = -asm.basis[1].value(lo) / asm.basis[3].value(lo)
        assert v[3] / v[1] == pytest.approx(expected_ratio, rel=1e-10)

    def test_harmonic_nullspace_is_decaying_pair(self, harmonic_problem):
        dof, system = degrees_of_freedom(harmonic_problem, 1.7)
        assert dof == 2
        nullity, vecs = nullspace(system)
        span = np.abs(np.array(vecs))
        assert np.max(span[:, 0]) < 1e-12 and np.max(span[:, 2]) < 1e-12


class TestNullspace:
    def test_full_rank_rows(self, well_problem):
        basis = exact_constant_basis(characteristic_roots(well_problem.epsilon, 5.0))
        system = ConstraintSystem(
            energy=5.0,
            matrix=np.eye(4, dtype=complex),
            row_kinds=("a", "b", "c", "d"),
            basis=tuple(basis),
            column_log_scales=np.zeros(4),
        )
        nullity, vecs = nullspace(system)
        assert nullity == 0 and vecs == []

    def test_zero_matrix_gives_canonical_basis(self, well_problem):
        basis = exact_constant_basis(characteristic_roots(well_problem.epsilon, 5.0))
        system = ConstraintSystem(
            energy=5.0,
            matrix=np.zeros((0, 4), dtype=complex),
            row_kinds=(),
            basis=tuple(basis),
            column_log_scales=np.zeros(4),
        )
        nullity, vecs = nullspace(system)
        assert nullity == 4
        assert np.allclose(np.array(vecs).T, np.eye(4))

    def test_well_generic_energy_nullity_two(self, well_problem):
        for e in (1.638, 8.191, 16.38):
            roots = characteristic_roots(well_problem.epsilon, e)
            basis = exact_constant_basis(roots)
            system = assemble(basis, conditions_for(well_problem), e)
            nullity, vecs = nullspace(system)
            assert nullity == 2
            # orthonormal in coefficient space
            g = np.array(vecs).conj() @ np.array(vecs).T
            assert np.allclose(g, np.eye(2), atol=1e-12)

    def test_special_energy_sine_vector_in_nullspace(self, well_setup, well_problem):
        for se in well_special_energies(well_setup, 3):
            roots = characteristic_roots(well_problem.epsilon, se.energy_dimensionless)
            basis = exact_constant_basis(roots)
            system = assemble(basis, conditions_for(well_problem), se.energy_dimensionless)
            kap = roots.kappa
            sine_vec = np.array([0, 0, math.sin(kap), math.cos(kap)], dtype=complex)
            assert system.row_residual(sine_vec) < 1e-12
            if se.k % 2 == 0:
                # even k: the unshifted pure-sine coefficient vector itself
                assert system.row_residual(np.array([0, 0, 0, 1], dtype=complex)) < 1e-12


class TestWellCoefficients:
    def test_special_energy_partner_annihilated(self, well_problem):
        roots = characteristic_roots(well_problem.epsilon, E1_DIMLESS)
        basis = exact_constant_basis(roots)
        system = assemble(basis, conditions_for(well_problem), E1_DIMLESS)
        vec = well_coefficients(basis, (-1.0, 1.0), (1, 2, 3), shifted_cos_kappa=roots.kappa)
        assert system.row_residual(vec) < 1e-12

    def test_generic_energy_triples_annihilated(self, well_problem):
        e = 8.1911537730
        roots = characteristic_roots(well_problem.epsilon, e)
        basis = exact_constant_basis(roots)
        system = assemble(basis, conditions_for(well_problem), e)
        for triple in ((1, 2, 3), (2, 3, 4)):
            vec = well_coefficients(basis, (-1.0, 1.0), triple)
            assert system.row_residual(vec) < 1e-12

    def test_scale_invariance_of_direction(self, well_problem):
        # multiplying all boundary values by a common factor only rescales
        e = 8.1911537730
        basis = exact_constant_basis(characteristic_roots(well_problem.epsilon, e))
        from gupbic.matcher import _cross_triple

        row_lo = [f.value(-1.0) for f in basis[:3]]
        row_hi = [f.value(1.0) for f in basis[:3]]
        d1 = _cross_triple(row_lo, row_hi)
        d2 = _cross_triple([7.3 * v for v in row_lo], [7.3 * v for v in row_hi])
        assert np.allclose(d2 / np.linalg.norm(d2), d1 / np.linalg.norm(d1), atol=1e-14)

    def test_agreement_with_nullspace_projection(self, well_problem):
        e = 8.1911537730
        roots = characteristic_roots(well_problem.epsilon, e)
        basis = exact_constant_basis(roots)
        system = assemble(basis, conditions_for(well_problem), e)
        _, null_vecs = nullspace(system)
        basis_mat = np.array(null_vecs).T  # 4 x 2, orthonormal columns
        for triple in ((1, 2, 3), (2, 3, 4)):
            vec = well_coefficients(basis, (-1.0, 1.0), triple)
            vec = vec / np.linalg.norm(vec)
            proj = basis_mat @ (basis_mat.conj().T @ vec)
            angle = math.acos(min(abs(np.vdot(proj, vec)) / np.linalg.norm(proj), 1.0))
            assert angle < 1e-8


class TestNormalize:
    def test_pure_sine_gram_entry_is_one(self, well_problem):
        # at a special energy int sin^2(kappa x) dx over the well is exactly 1
        roots = characteristic_roots(well_problem.epsilon, E1_DIMLESS)
        basis = exact_constant_basis(roots)
        sol = normalize(
            [np.array([0, 0, math.sin(roots.kappa), math.cos(roots.kappa)])],
            basis,
            regions=[(-1.0, 1.0)],
            problem=well_problem,
            energy=E1_DIMLESS,
        )
        # gram covers the active (cos, sin) pair; the sin-sin entry is [1, 1]
        assert sol.gram.shape == (2, 2)
        assert sol.gram[1, 1].real == pytest.approx(1.0, abs=1e-10)
        # SI amplitude: phi_SI = phi / sqrt(a) = (1/sqrt(a)) sin(...)
        a_si = well_problem.length_scale
        st = sol.states[0]
        x = 0.37
        expected = math.sin(roots.kappa * (x + 1.0)) / math.sqrt(a_si)
        assert abs(st.value(x)) / math.sqrt(a_si) == pytest.approx(abs(expected), rel=1e-10)

    def test_zero_vector_rejected(self, well_problem):
        basis = exact_constant_basis(characteristic_roots(well_problem.epsilon, E1_DIMLESS))
        with pytest.raises(NormalizationError):
            normalize(
                [np.zeros(4)], basis, regions=[(-1.0, 1.0)],
                problem=well_problem, energy=E1_DIMLESS,
            )

    def test_growing_guard(self, linear_problem):
        from gupbic.matcher import wkb_assembly

        asm = wkb_assembly(linear_problem, 2.0)
        with pytest.raises(NormalizationError, match="growing"):
            normalize(
                [np.array([1.0, 0, 0, 0])], asm.basis, regions=[(0.1, 1.0)],
                problem=linear_problem, energy=2.0, growing_guard=(1, 3),
            )

    def test_gram_is_hermitian_psd(self, well_problem):
        sol = solve_well(well_problem, 8.1911537730)
        g = sol.gram
        assert np.allclose(g, g.conj().T, atol=1e-10)
        assert np.all(np.linalg.eigvalsh(g) > -1e-10)


class TestSolvers:
    def test_well_special_pair(self, well_problem):
        sol = solve_well(well_problem, E1_DIMLESS)
        assert sol.degeneracy == 2
        xs = np.linspace(-1, 1, 101)
        sine = np.sin(np.pi / 2 * (xs + 1))
        vals = np.array([sol.states[0].value(x).real for x in xs])
        sign = 1.0 if np.dot(vals, sine) > 0 else -1.0
        assert np.max(np.abs(sign * vals - sine)) < 1e-10
        # partner satisfies both walls
        assert abs(sol.states[1].value(-1.0)) < 1e-10
        assert abs(sol.states[1].value(1.0)) < 1e-10

    def test_well_generic_pair_mixes_components(self, well_problem):
        sol = solve_well(well_problem, 1.6382307546)
        assert sol.degeneracy == 2
        for st in sol.states:
            exp_part = np.max(np.abs(st.coefficients[:2]))
            osc_part = np.max(np.abs(st.coefficients[2:]))
            assert exp_part > 1e-8 and osc_part > 1e-3

    def test_well_pair_orthonormal(self, well_problem):
        sol = solve_well(well_problem, 1.6382307546)
        ips = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                ips[i, j] = quad(
                    lambda x: (sol.states[i].value(x) * np.conj(sol.states[j].value(x))).real,
                    -1.0, 1.0, limit=200,
                )[0]
        assert np.allclose(ips, np.eye(2), atol=1e-8)

    def test_well_raw_mode_not_orthogonal(self, well_problem):
        sol = solve_well(well_problem, 1.6382307546, orthogonalize=False)
        ip = quad(
            lambda x: (sol.states[0].value(x) * np.conj(sol.states[1].value(x))).real,
            -1.0, 1.0, limit=200,
        )[0]
        assert abs(ip) > 1e-3  # the raw determinant pair genuinely overlaps

    def test_well_span_matches_determinant_construction(self, well_problem):
        # orthonormal output spans the same plane as the determinant pair
        e = 1.6382307546
        sol = solve_well(well_problem, e)
        roots = characteristic_roots(well_problem.epsilon, e)
        basis = exact_constant_basis(roots)
        det_pair = [
            well_coefficients(basis, (-1.0, 1.0), (1, 2, 3)),
            well_coefficients(basis, (-1.0, 1.0), (2, 3, 4)),
        ]
        q_det, _ = np.linalg.qr(np.array(det_pair).T)
        q_out, _ = np.linalg.qr(np.array([st.coefficients for st in sol.states]).T)
        # principal angles via singular values of q1^H q2
        svals = np.linalg.svd(q_det.conj().T @ q_out, compute_uv=False)
        assert np.all(np.abs(svals - 1.0) < 1e-8)

    def test_well_states_satisfy_ode(self, well_problem):
        sol = solve_well(well_problem, 5.5)
        grid = np.linspace(-0.999, 0.999, 2000)
        for st in sol.states:
            assert residual(st, well_problem, 5.5, grid) < 1e-6

    def test_extra_condition_injection_reduces_dof(self, well_problem):
        sol = solve_well(well_problem, 5.5)
        assert sol.degeneracy == 2
        roots = characteristic_roots(well_problem.epsilon, 5.5)
        basis = exact_constant_basis(roots)
        system = assemble(
            basis, conditions_for(well_problem), 5.5, extra_conditions=[0.3]
        )
        nullity, _ = nullspace(system)
        assert nullity == 1

    def test_curvature_condition_injection(self, well_problem):
        # opt-in phi''(+-a) = 0 rows for sensitivity studies
        roots = characteristic_roots(well_problem.epsilon, 5.5)
        basis = exact_constant_basis(roots)
        system = assemble(
            basis,
            conditions_for(well_problem),
            5.5,
            extra_conditions=[(-1.0, 2), (1.0, 2)],
        )
        assert "phi^(2)(-1) = 0" in system.row_kinds
        nullity, _ = nullspace(system)
        assert nullity == 0  # generic energy: all four coefficients pinned

    def test_linear_state(self, linear_problem):
        sol = solve_linear(linear_problem, 2.0)
        assert sol.degeneracy == 1
        st = sol.states[0]
        assert abs(st.value(0.0)) < 1e-10
        norm = sum(
            quad(lambda x: abs(st.value(x)) ** 2, lo, hi, limit=300)[0]
            for lo, hi in sol.regions
        )
        assert norm == pytest.approx(1.0, abs=1e-8)

    def test_linear_state_ode_residual(self):
        # The slow-branch amplitude error is the classical second-order-WKB
        # one, ~(5/16)/|v-e|^3 relative, so the <=5% contract applies at least
        # |v - e| >= ~1.6 away from the turning point.
        problem = nondimensionalize(linear_setup_for(1e-3))
        sol = solve_linear(problem, 2.0)
        st = sol.states[0]
        x_t = 2.0
        grid = np.concatenate(
            [np.linspace(0.05, x_t - 1.65, 30), np.linspace(x_t + 1.6, x_t + 3.0, 30)]
        )
        assert residual(st, problem, 2.0, grid) < 0.05

    def test_harmonic_pair(self):
        problem = nondimensionalize(harmonic_setup_for(0.002))
        sol = solve_harmonic(problem, 1.7)
        assert sol.degeneracy == 2
        ip = sum(
            quad(
                lambda x: (sol.states[0].value(x) * np.conj(sol.states[1].value(x))).real,
                lo, hi, limit=300,
            )[0]
            + 1j
            * quad(
                lambda x: (sol.states[0].value(x) * np.conj(sol.states[1].value(x))).imag,
                lo, hi, limit=300,
            )[0]
            for lo, hi in sol.regions
        )
        assert abs(ip) < 1e-8

    def test_dof_matches_prediction_50_random_energies(
        self, well_problem, linear_problem, harmonic_problem
    ):
        rng = np.random.default_rng(42)
        for problem, e_range in (
            (well_problem, (0.3, 30.0)),
            (linear_problem, (0.5, 18.0)),
            (harmonic_problem, (0.5, 18.0)),
        ):
            predicted = classify(conditions_for(problem)).predicted_dof
            for e in rng.uniform(*e_range, size=50):
                dof, _ = degrees_of_freedom(problem, float(e))
                assert dof == predicted, f"{problem.kind} at e={e}"

    def test_bound_states_dispatch(self, well_problem, linear_problem):
        assert bound_states(well_problem, 5.5).degeneracy == 2
        assert bound_states(linear_problem, 2.0).degeneracy == 1

    def test_extreme_epsilon_counts_but_fails_vectors_loudly(self):
        # mu1 ~ 1/sqrt(eps) = 1000: the e^{-mu} boundary-layer coefficients
        # underflow doubles; the dof count survives, the solve refuses
        from gupbic.errors import NumericalError
        from gupbic.verification import beta_for_epsilon, reference_well_setup

        setup = reference_well_setup(beta=beta_for_epsilon(1e-6, 1e-10))
        problem = nondimensionalize(setup)
        assert degrees_of_freedom(problem, 5.0)[0] == 2
        with pytest.raises(NumericalError, match="underflow"):
            solve_well(problem, 5.0)

    def test_well_solves_across_wide_conditioning(self):
        from gupbic.verification import beta_for_epsilon, reference_well_setup

        for eps, e in [(1e-4, 30.0), (5.0, 3.0), (0.074, 2000.0)]:
            problem = nondimensionalize(
                reference_well_setup(beta=beta_for_epsilon(eps, 1e-10))
            )
            sol = solve_well(problem, e)
            assert sol.degeneracy == 2
            for st in sol.states:
                assert abs(st.value(-1.0)) < 1e-8
                assert abs(st.value(1.0)) < 1e-8

    def test_custom_not_supported(self):
        from gupbic import PhysicalSetup, TabulatedCustom

        xs = tuple(np.linspace(0, 4e-10, 6))
        vs = tuple(np.linspace(0, 4e-18, 6))
        problem = nondimensionalize(
            PhysicalSetup(mass=9.1e-31, beta=1e46, potential=TabulatedCustom(xs=xs, vs=vs))
        )
        with pytest.raises(WrongPotentialError):
            bound_states(problem, 1.0)
