import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from latticebc import (
    KPoly,
    LatticeSpec,
    MicroBCSpec,
    build_B,
    build_L0,
    build_Lk,
    build_Lk_exact,
    build_steady_operator,
    reversed_spec,
    validate_spec,
)
from latticebc.lattice import CellIndex

from conftest import make_spec, random_spec


def spec_strategy(max_s=3, max_p=4):
    @st.composite
    def build(draw):
        s = draw(st.integers(1, max_s))
        p = draw(st.integers(1, max_p))
        seed = draw(st.integers(0, 2 ** 31 - 1))
        return random_spec(np.random.default_rng(seed), s, p)

    return build()


class TestValidateSpec:
    def test_valid_uniform(self, uniform_spec):
        assert validate_spec(uniform_spec) == []

    def test_zero_longitudinal_elasticity(self):
        spec = make_spec(1, 1, [[0.0]], np.zeros((1, 1, 1)), [[1.0]])
        assert any("longitudinal" in v for v in validate_spec(spec))

    def test_asymmetric_cross(self):
        kc = np.zeros((1, 2, 2))
        kc[0, 0, 1] = 1.0
        spec = make_spec(2, 1, [[1.0, 1.0]], kc, [[1.0, 1.0]])
        assert any("asymmetric" in v for v in validate_spec(spec))

    def test_nonzero_self_elasticity(self):
        kc = np.zeros((1, 2, 2))
        kc[0] = [[1.0, 0.5], [0.5, 0.0]]
        spec = make_spec(2, 1, [[1.0, 1.0]], kc, [[1.0, 1.0]])
        assert any("self" in v for v in validate_spec(spec))

    def test_bad_shapes(self):
        spec = LatticeSpec(s=2, p=2, h=1.0, N=8,
                           kappa_long=np.ones((2, 1)),
                           kappa_cross=np.zeros((2, 2, 2)),
                           rho=np.ones((2, 2)))
        assert any("shape" in v for v in validate_spec(spec))

    def test_nonpositive_density(self):
        spec = make_spec(1, 1, [[1.0]], np.zeros((1, 1, 1)), [[-1.0]])
        assert any("density" in v for v in validate_spec(spec))


class TestCellIndex:
    def test_flat_ordering(self):
        idx = CellIndex.from_mj(3, 2, 1)
        assert idx.flat == 7
        back = CellIndex.from_flat(3, 7)
        assert (back.m, back.j) == (2, 1)


class TestMassMatrix:
    def test_uniform(self, uniform_spec):
        assert np.array_equal(build_B(uniform_spec), [[1.0]])

    def test_scaling(self):
        spec = make_spec(1, 1, [[1.0]], np.zeros((1, 1, 1)), [[2.0]], h=0.5)
        assert np.allclose(build_B(spec), [[0.5]])

    def test_demo_densities(self, demo2x2_spec):
        assert np.allclose(np.diag(build_B(demo2x2_spec)), [1.0, 2.0, 4.0, 0.5])


class TestL0:
    def test_single_mass_is_zero(self, uniform_spec):
        assert np.array_equal(build_L0(uniform_spec), [[0.0]])

    def test_two_step_chain(self, two_step_spec):
        assert np.allclose(build_L0(two_step_spec), [[-4.0, 4.0], [4.0, -4.0]])

    def test_demo_diagonal_totals(self, demo2x2_spec):
        # diagonal of each block is minus (left spring + right spring + cross)
        L0 = build_L0(demo2x2_spec)
        assert L0[0, 0] == pytest.approx(-(0.1 + 2.0 + 1.0))
        assert L0[1, 1] == pytest.approx(-(5.0 + 0.5 + 1.0))
        assert L0[2, 2] == pytest.approx(-(2.0 + 0.1 + 0.1))
        assert L0[3, 3] == pytest.approx(-(0.5 + 5.0 + 0.1))

    @given(spec_strategy())
    @settings(max_examples=30, deadline=None)
    def test_symmetric_zero_rowsum_psd(self, spec):
        L0 = build_L0(spec)
        assert np.max(np.abs(L0 - L0.T)) == 0.0
        row_norms = np.maximum(np.linalg.norm(L0, axis=1), 1.0)
        assert np.max(np.abs(L0.sum(axis=1)) / row_norms) < 1e-12
        lam = np.linalg.eigvalsh(-L0)
        assert lam.min() > -1e-10 * max(1.0, np.linalg.norm(L0))


class TestLk:
    def test_uniform_entry(self, uniform_spec):
        M = build_Lk(uniform_spec)
        assert M.entry(0, 0).coeffs == (0.0, 0.0, -1.0)

    def test_uniform_apply_ones(self, uniform_spec):
        out = build_Lk(uniform_spec).apply([KPoly.one()])
        assert out[0].coeffs == (0.0, 0.0, -1.0)

    def test_two_step_constant_part(self, two_step_spec):
        M = build_Lk(two_step_spec)
        assert np.allclose(M.coefficient_matrix(0).real, [[-4.0, 4.0], [4.0, -4.0]])

    @given(spec_strategy())
    @settings(max_examples=25, deadline=None)
    def test_constant_part_is_L0(self, spec):
        M = build_Lk(spec)
        assert np.allclose(M.coefficient_matrix(0), build_L0(spec), atol=1e-14)

    @given(spec_strategy())
    @settings(max_examples=25, deadline=None)
    def test_hermitian_at_real_k(self, spec):
        at = build_Lk(spec).eval(0.37 / (spec.p * spec.h))
        assert np.max(np.abs(at - at.conj().T)) < 1e-12 * max(1.0, np.max(np.abs(at)))

    @given(spec_strategy())
    @settings(max_examples=25, deadline=None)
    def test_truncation_matches_exact_to_cubic_order(self, spec):
        # fit the cubic-bound constant at the larger wavenumber and check
        # the smaller one; valid for any actual error order >= 3
        k1, k2 = 1e-3 / (spec.p * spec.h), 2e-3 / (spec.p * spec.h)

        def diff(k):
            return np.max(np.abs(build_Lk(spec).eval(k) - build_Lk_exact(spec, k)))

        c_fit = diff(k2) / k2 ** 3
        assert diff(k1) <= 1.05 * max(c_fit, 1e-9) * k1 ** 3 + 1e-15

    def test_exact_hermitian(self, demo2x2_spec):
        L = build_Lk_exact(demo2x2_spec, 0.7)
        assert np.max(np.abs(L - L.conj().T)) < 1e-12


class TestZeroMode:
    @given(spec_strategy())
    @settings(max_examples=20, deadline=None)
    def test_zero_eigenvalue_simple_for_connected(self, spec):
        lam = scipy.linalg.eigh(-build_L0(spec), build_B(spec), eigvals_only=True)
        tol = 1e-10 * max(1.0, lam[-1])
        assert np.sum(np.abs(lam) <= tol) == 1

    def test_constant_vector_in_kernel(self, demo2x2_spec):
        L0 = build_L0(demo2x2_spec)
        assert np.linalg.norm(L0 @ np.ones(4)) < 1e-12 * np.linalg.norm(L0)


class TestSteadyOperator:
    def test_uniform_row(self, uniform_spec):
        A = build_steady_operator(uniform_spec, rows=1)
        assert np.allclose(A, [[1.0, -2.0, 1.0]])

    def test_two_strand_rows(self, demo2x2_spec):
        # first s*p equilibrium rows, columns over masses n = 0..3;
        # kl = [[2, .5], [.1, 5]], cross = (1, .1) per column
        k00, k01, k10, k11 = 2.0, 0.5, 0.1, 5.0
        c0, c1 = 1.0, 0.1
        expected = np.array([
            [k00, 0, -(k00 + k10 + c1), c1, k10, 0, 0, 0],
            [0, k01, c1, -(k01 + k11 + c1), 0, k11, 0, 0],
            [0, 0, k10, 0, -(k10 + k00 + c0), c0, k00, 0],
            [0, 0, 0, k11, c0, -(k11 + k01 + c0), 0, k01],
        ])
        assert np.allclose(build_steady_operator(demo2x2_spec, rows=2), expected)

    @given(spec_strategy())
    @settings(max_examples=25, deadline=None)
    def test_row_sums_zero(self, spec):
        A = build_steady_operator(spec)
        assert np.max(np.abs(A.sum(axis=1))) < 1e-12 * max(1.0, np.abs(A).max())

    def test_domain_size(self, demo2x2_spec):
        N, s = demo2x2_spec.N, demo2x2_spec.s
        A = build_steady_operator(demo2x2_spec, rows=N - 1)
        assert A.shape == (s * (N - 1), s * (N + 1))

    def test_rejects_no_rows(self, uniform_spec):
        with pytest.raises(ValueError):
            build_steady_operator(uniform_spec, rows=0)


class TestReversal:
    def test_matches_permuted_operator(self):
        rng = np.random.default_rng(5)
        spec = random_spec(rng, 2, 3, N=7)
        N, s = spec.N, spec.s
        A = build_steady_operator(spec, rows=N - 1)
        A_rev = build_steady_operator(reversed_spec(spec), rows=N - 1)
        # reversed equation n' corresponds to original equation N - n',
        # reversed column block n' to original block N - n'
        row_perm = np.concatenate(
            [np.arange((N - 1 - n) * s, (N - n) * s) for n in range(1, N)]
        )
        col_perm = np.concatenate([np.arange((N - n) * s, (N - n + 1) * s) for n in range(N + 1)])
        assert np.allclose(A_rev, A[np.ix_(row_perm, col_perm)])

    def test_involution(self):
        rng = np.random.default_rng(6)
        spec = random_spec(rng, 2, 3, N=8)
        back = reversed_spec(reversed_spec(spec))
        assert np.array_equal(back.kappa_long, spec.kappa_long)
        assert np.array_equal(back.kappa_cross, spec.kappa_cross)
        assert np.array_equal(back.rho, spec.rho)


class TestMicroBC:
    def test_zero_dirichlet(self):
        bc = MicroBCSpec.dirichlet_zero(3)
        assert bc.values.shape == (3,)
        assert bc.side == "left"

    def test_bad_side(self):
        with pytest.raises(ValueError):
            MicroBCSpec("dirichlet", np.zeros(2), side="top")
