"""Paraproduct/remainder calculus, Chemin-Lerner norms, transport commutators."""

import math

import numpy as np
import pytest

from oldroydb.fields import ScalarField, random_scalar, random_sym_tensor, random_vector
from oldroydb.grid import TorusGrid
from oldroydb.littlewood_paley import (
    besov_norm,
    build_partition,
    chemin_lerner_from_blocks,
    chemin_lerner_norm,
    commutator,
    commutator_block_norms,
    dyadic_block,
    paraproduct,
    remainder,
)
from oldroydb.operators import l2_norm, leray_project, multiply


def _single_mode(grid, kvec, a=1.0):
    coeffs = np.zeros((1,) + grid.shape, complex)
    coeffs[(0,) + tuple(k % grid.n for k in kvec)] = a
    coeffs[(0,) + tuple((-k) % grid.n for k in kvec)] = np.conj(a)
    return ScalarField(grid, coeffs)


class TestBony:
    def test_zero_factor(self, grid2, rng):
        f = ScalarField.zero(grid2)
        g = random_scalar(grid2, rng)
        assert np.max(np.abs(paraproduct(f, g).coeffs)) == 0.0
        assert np.max(np.abs(paraproduct(g, f).coeffs)) == 0.0
        assert np.max(np.abs(remainder(f, g).coeffs)) == 0.0

    def test_decomposition_reconstructs_product(self, grid2, rng):
        part = build_partition(grid2)
        for _ in range(10):
            f = random_scalar(grid2, rng, band=(1.0, grid2.n // 3))
            g = random_scalar(grid2, rng, band=(1.0, grid2.n // 3))
            direct = multiply(f, g)
            total = (paraproduct(f, g, part) + paraproduct(g, f, part)
                     + remainder(f, g, part))
            scale = np.max(np.abs(direct.coeffs))
            assert np.max(np.abs(total.coeffs - direct.coeffs)) <= 1e-10 * scale

    def test_separated_modes_land_in_one_paraproduct(self):
        grid = TorusGrid(2, 128)
        part = build_partition(grid)
        f = _single_mode(grid, (1, 0))     # active blocks q in {-1, 0}
        g = _single_mode(grid, (32, 0))    # active blocks q in {4, 5, 6}
        # the low factor never survives S_{q-1} on the high factor's blocks
        tgf = paraproduct(g, f, part)
        assert np.max(np.abs(tgf.coeffs)) == 0.0
        tfg = paraproduct(f, g, part)
        rem = remainder(f, g, part)
        direct = multiply(f, g)
        recon = tfg + paraproduct(g, f, part) + rem
        scale = np.max(np.abs(direct.coeffs))
        assert np.max(np.abs(recon.coeffs - direct.coeffs)) <= 1e-12 * scale
        assert np.max(np.abs(tfg.coeffs)) > 0.0

    def test_scalars_only(self, grid2, rng):
        u = random_vector(grid2, rng)
        f = random_scalar(grid2, rng)
        with pytest.raises(ValueError):
            paraproduct(u, f)  # type: ignore[arg-type]


class TestCheminLerner:
    def test_constant_series_at_rho_inf_matches_spatial_norm(self, grid2, rng):
        f = random_scalar(grid2, rng, band=(1.0, 10.0))
        times = np.linspace(0.0, 2.0, 9)
        samples = [f] * 9
        s, r = 0.5, 1.0
        val = chemin_lerner_norm(samples, times, np.inf, s, r)
        assert val == pytest.approx(besov_norm(f, s=s, r=r), rel=1e-12)

    def test_minkowski_ordering_on_samples(self, grid2, rng):
        # tilde norm vs classical time norm of the Besov norm
        part = build_partition(grid2)
        times = np.linspace(0.0, 1.0, 21)
        fields = [random_scalar(grid2, rng, band=(1.0, 10.0)) for _ in times]
        from oldroydb.littlewood_paley import block_l2_norms

        mat = np.stack([block_l2_norms(f, part) for f in fields])
        s = 0.3
        w = 2.0 ** (part.q_values * s)

        # r = 1 <= rho = 2: tilde >= classical
        tilde = chemin_lerner_from_blocks(times, mat, part.q_values, 2.0, s, 1.0)
        classical = math.sqrt(np.trapezoid(np.sum(w * mat, axis=1) ** 2, times))
        assert tilde >= classical * (1 - 1e-12)

        # r = inf >= rho = 2: tilde <= classical
        tilde_inf = chemin_lerner_from_blocks(times, mat, part.q_values, 2.0, s, np.inf)
        classical_inf = math.sqrt(np.trapezoid(np.max(w * mat, axis=1) ** 2, times))
        assert tilde_inf <= classical_inf * (1 + 1e-12)

    def test_decaying_mode_against_closed_form(self):
        grid = TorusGrid(2, 16)
        f0 = _single_mode(grid, (3, 0), a=0.25)
        times = np.linspace(0.0, 1.0, 2001)
        samples = [f0 * math.exp(-t) for t in times]
        s, r = 0.5, 1.0
        got = chemin_lerner_norm(samples, times, 2.0, s, r)
        spatial = besov_norm(f0, s=s, r=r)
        time_factor = math.sqrt((1.0 - math.exp(-2.0)) / 2.0)
        assert got == pytest.approx(spatial * time_factor, rel=1e-6)

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            chemin_lerner_norm([], [], 2.0, 0.0, 1.0)

    def test_bad_rho_rejected(self, grid2, rng):
        f = random_scalar(grid2, rng)
        with pytest.raises(Exception):
            chemin_lerner_norm([f], [0.0], 3.0, 0.0, 1.0)


class TestCommutator:
    def test_zero_velocity(self, grid2, rng):
        from oldroydb.fields import VectorField

        tau = random_sym_tensor(grid2, rng)
        part = build_partition(grid2)
        out = commutator(0, VectorField.zero(grid2), tau, part)
        assert np.max(np.abs(out.coeffs)) == 0.0

    def test_out_of_range_q(self, grid2, rng):
        u = leray_project(random_vector(grid2, rng))
        tau = random_sym_tensor(grid2, rng)
        with pytest.raises(ValueError):
            commutator(99, u, tau)

    def test_support_locality(self):
        # low-frequency velocity against a single-block field: the commutator
        # lives near that block and vanishes far away
        grid = TorusGrid(2, 128)
        part = build_partition(grid)
        rng = np.random.default_rng(5)
        u = leray_project(random_vector(grid, rng, band=(1.0, 2.0)))
        f = random_scalar(grid, rng, band=(1.0, 40.0))
        q0 = 4
        f_banded = dyadic_block(f, q0, part)
        u_phys = u.to_physical()
        from oldroydb.operators import advect

        transported = advect(u, f_banded, u_phys)
        near = l2_norm(commutator(q0, u, f_banded, part, u_phys=u_phys,
                                  transported=transported))
        for q_far in (q0 - 3, q0 + 3):
            far = l2_norm(commutator(q_far, u, f_banded, part, u_phys=u_phys,
                                     transported=transported))
            assert far <= 1e-10 * max(near, l2_norm(f_banded))

    def test_block_norm_series_shape(self, grid2, rng):
        u = leray_project(random_vector(grid2, rng, band=(1.0, 8.0)))
        tau = random_sym_tensor(grid2, rng, band=(1.0, 8.0))
        part = build_partition(grid2)
        norms = commutator_block_norms(u, tau, part)
        assert norms.shape == (part.nq,)
        assert np.all(norms >= 0.0)
        assert np.any(norms > 0.0)
