import itertools
import math

import numpy as np
import pytest

from csllab.core import (
    CoverageError,
    CslParams,
    Particle,
    ParticleConfiguration,
    SpeciesTable,
    ValidationError,
)
from csllab.density import (
    QuadratureGrid,
    build_dephasing_matrix,
    build_density_operator,
    density_eigenvalue,
    gaussian_overlap,
    gaussian_weight,
    mass_density_eigenvalue,
    pairwise_dephasing_rate,
)
from csllab.nogo import mirror_construction

PARAMS = CslParams.from_rc(100.0, 1e-9, dim=3)


def config(*points, species=0):
    return ParticleConfiguration.from_points(points, species=species)


def midpoint_points(lo, hi, spacing):
    """Independent midpoint-rule grid used as the quadrature oracle."""
    axes = [np.arange(a, b, spacing) + spacing / 2 for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def g_vec(points, center, params):
    """Test-local vectorized kernel; cross-checked against gaussian_weight below."""
    pref = (params.alpha / (2 * math.pi)) ** (params.dim / 2)
    d2 = np.sum((points - np.asarray(center)) ** 2, axis=1)
    return pref * np.exp(-params.alpha / 2 * d2)


def test_vectorized_oracle_matches_pointwise_kernel():
    rng = np.random.default_rng(1)
    for dim in (1, 2, 3):
        params = CslParams.from_rc(80.0, 0.0, dim=dim)
        pts = rng.uniform(-200, 200, size=(50, dim))
        center = rng.uniform(-100, 100, dim)
        vec = g_vec(pts, center, params)
        for p, v in zip(pts, vec):
            assert v == pytest.approx(gaussian_weight(tuple(p - center), params), rel=1e-14)


class TestGaussianWeight:
    def test_unit_prefactor(self):
        params = CslParams(alpha=2 * math.pi, gamma=0.0, dim=3)
        assert gaussian_weight((0.0, 0.0, 0.0), params) == pytest.approx(1.0, rel=1e-15)

    def test_one_over_e_at_two_over_alpha(self):
        peak = gaussian_weight((0.0, 0.0, 0.0), PARAMS)
        r = math.sqrt(2.0 / PARAMS.alpha)
        assert gaussian_weight((r, 0.0, 0.0), PARAMS) == pytest.approx(peak / math.e, rel=1e-14)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_quadrature_normalization(self, dim):
        params = CslParams.from_rc(100.0, 0.0, dim=dim)
        rc = params.r_c
        pts = midpoint_points([-6 * rc] * dim, [6 * rc] * dim, rc / 8)
        total = g_vec(pts, np.zeros(dim), params).sum() * (rc / 8) ** dim
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            rot, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            x = rng.uniform(-300, 300, 3)
            g1 = gaussian_weight(tuple(x), PARAMS)
            g2 = gaussian_weight(tuple(rot @ x), PARAMS)
            assert abs(g1 - g2) <= 1e-12 * max(g1, g2)


class TestDensityEigenvalue:
    def test_single_particle_peak(self):
        q = config((10.0, -5.0, 2.0))
        peak = (PARAMS.alpha / (2 * math.pi)) ** 1.5
        assert density_eigenvalue((10.0, -5.0, 2.0), q, PARAMS) == pytest.approx(peak, rel=1e-14)

    def test_two_equidistant_particles(self):
        r = 70.0
        q = config((r, 0.0, 0.0), (-r, 0.0, 0.0))
        peak = (PARAMS.alpha / (2 * math.pi)) ** 1.5
        expected = 2 * peak * math.exp(-PARAMS.alpha * r**2 / 2)
        assert density_eigenvalue((0.0, 0.0, 0.0), q, PARAMS) == pytest.approx(expected, rel=1e-14)

    def test_matches_bruteforce_loop(self):
        # independent scalar-loop evaluation of the eigenvalue sum
        params = CslParams(alpha=2.0, gamma=0.0, dim=3)
        q = config((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0))
        x = (0.0, 0.0, 0.0)
        expected = 0.0
        for particle in q.particles:
            d2 = sum((a - b) ** 2 for a, b in zip(particle.pos, x))
            expected += (2.0 / (2 * math.pi)) ** 1.5 * math.exp(-2.0 / 2 * d2)
        assert density_eigenvalue(x, q, params) == pytest.approx(expected, rel=1e-14)

    def test_permutation_and_spin_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = rng.integers(1, 5)
            pts = [tuple(p) for p in rng.uniform(-200, 200, size=(n, 3))]
            x = tuple(rng.uniform(-200, 200, 3))
            perm = rng.permutation(n)
            q1 = ParticleConfiguration(tuple(Particle(p, 0, 0) for p in pts))
            q2 = ParticleConfiguration(
                tuple(Particle(pts[i], 0, int(rng.integers(0, 3))) for i in perm)
            )
            assert density_eigenvalue(x, q1, PARAMS) == pytest.approx(
                density_eigenvalue(x, q2, PARAMS), rel=1e-14
            )


class TestMassDensity:
    TABLE = SpeciesTable({0: 1.0, 1: 2.0})

    def test_reduces_to_number_density(self):
        q = config((0.0, 0.0, 0.0), (50.0, 20.0, -10.0))
        x = (12.0, 3.0, 4.0)
        assert mass_density_eigenvalue(x, q, SpeciesTable(), PARAMS) == pytest.approx(
            density_eigenvalue(x, q, PARAMS), rel=1e-15
        )

    def test_single_particle_ratio_two(self):
        q = config((30.0, 0.0, 0.0), species=1)
        x = (0.0, 0.0, 0.0)
        assert mass_density_eigenvalue(x, q, self.TABLE, PARAMS) == pytest.approx(
            2 * density_eigenvalue(x, config((30.0, 0.0, 0.0)), PARAMS), rel=1e-15
        )

    def test_mixed_species_additivity(self):
        a, b = (10.0, 0.0, 0.0), (-25.0, 40.0, 0.0)
        mixed = ParticleConfiguration((Particle(a, 0), Particle(b, 1)))
        x = (5.0, 5.0, 5.0)
        total = mass_density_eigenvalue(x, mixed, self.TABLE, PARAMS)
        parts = mass_density_eigenvalue(
            x, ParticleConfiguration((Particle(a, 0),)), self.TABLE, PARAMS
        ) + mass_density_eigenvalue(
            x, ParticleConfiguration((Particle(b, 1),)), self.TABLE, PARAMS
        )
        assert total == pytest.approx(parts, rel=1e-14)

    def test_unknown_species(self):
        q = config((0.0, 0.0, 0.0), species=9)
        with pytest.raises(ValidationError):
            mass_density_eigenvalue((0.0, 0.0, 0.0), q, self.TABLE, PARAMS)


class TestGaussianOverlap:
    def test_zero_separation(self):
        u = (5.0, 5.0, 5.0)
        assert gaussian_overlap(u, u, PARAMS) == pytest.approx(
            (PARAMS.alpha / (4 * math.pi)) ** 1.5, rel=1e-15
        )

    def test_one_over_e(self):
        d = math.sqrt(4.0 / PARAMS.alpha)
        expected = (PARAMS.alpha / (4 * math.pi)) ** 1.5 / math.e
        assert gaussian_overlap((0.0, 0.0, 0.0), (d, 0.0, 0.0), PARAMS) == pytest.approx(
            expected, rel=1e-14
        )

    @pytest.mark.parametrize("dim", [1, 3])
    def test_quadrature_oracle(self, dim):
        rng = np.random.default_rng(17)
        for _ in range(3):
            rc = rng.uniform(50, 150)
            params = CslParams.from_rc(rc, 0.0, dim=dim)
            u = rng.uniform(-rc, rc, dim)
            v = rng.uniform(-rc, rc, dim)
            h = rc / 8
            pts = midpoint_points(np.minimum(u, v) - 6 * rc, np.maximum(u, v) + 6 * rc, h)
            quad = (g_vec(pts, u, params) * g_vec(pts, v, params)).sum() * h**dim
            closed = gaussian_overlap(tuple(u), tuple(v), params)
            assert abs(quad - closed) <= 1e-6 * closed


class TestPairwiseDephasingRate:
    def test_identical_configurations(self):
        q = config((1.0, 2.0, 3.0), (4.0, 5.0, 6.0))
        assert pairwise_dephasing_rate(q, q, PARAMS) == 0.0

    def test_single_particle_closed_form(self):
        lam = PARAMS.gamma * (PARAMS.alpha / (4 * math.pi)) ** 1.5
        for sep in (50.0, 100.0, 400.0):
            rate = pairwise_dephasing_rate(
                config((0.0, 0.0, 0.0)), config((sep, 0.0, 0.0)), PARAMS
            )
            target = lam * (1 - math.exp(-PARAMS.alpha * sep**2 / 4))
            assert rate == pytest.approx(target, rel=1e-12)

    def test_large_separation_saturates_at_lambda(self):
        lam = PARAMS.gamma * (PARAMS.alpha / (4 * math.pi)) ** 1.5
        rate = pairwise_dephasing_rate(
            config((0.0, 0.0, 0.0)), config((5000.0, 0.0, 0.0)), PARAMS
        )
        assert rate == pytest.approx(lam, rel=1e-10)

    def test_closed_form_vs_quadrature_random(self):
        # 100 random two-configuration instances, d = 3, spacing r_c/8, margin 6 r_c
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(1, 3))
            qa = config(*[tuple(p) for p in rng.uniform(-50, 50, size=(n, 3))])
            qb = config(*[tuple(p) for p in rng.uniform(-50, 50, size=(n, 3))])
            closed = pairwise_dephasing_rate(qa, qb, PARAMS, method="closed_form")
            quad = pairwise_dephasing_rate(qa, qb, PARAMS, method="quadrature")
            assert abs(quad - closed) <= 1e-4 * closed

    def test_zero_iff_multiset_equal(self):
        eps = 1e-13 * PARAMS.r_c
        qa = config((0.0, 0.0, 0.0), (80.0, 0.0, 0.0))
        qb = config((80.0, 0.0, 0.0), (eps, 0.0, 0.0))
        assert pairwise_dephasing_rate(qa, qb, PARAMS) == 0.0

        pair = mirror_construction(
            (0.0, 0.0, 0.0), config((60.0, 10.0, -30.0)), [[True, False, False]], PARAMS
        )
        assert pairwise_dephasing_rate(pair.q_a, pair.q_b, PARAMS) > 0.0

    def test_quadrature_coverage_error(self):
        qa = config((0.0, 0.0, 0.0))
        qb = config((200.0, 0.0, 0.0))
        grid = QuadratureGrid(
            lower=(-100.0, -100.0, -100.0), upper=(300.0, 100.0, 100.0), spacing=PARAMS.r_c / 8
        )
        with pytest.raises(CoverageError):
            pairwise_dephasing_rate(qa, qb, PARAMS, method="quadrature", grid=grid)

    def test_mass_weighting_scales_quadratically(self):
        table = SpeciesTable({0: 1.0, 1: 2.0})
        qa0, qb0 = config((0.0, 0.0, 0.0)), config((300.0, 0.0, 0.0))
        qa1 = config((0.0, 0.0, 0.0), species=1)
        qb1 = config((300.0, 0.0, 0.0), species=1)
        base = pairwise_dephasing_rate(qa0, qb0, PARAMS, species=table)
        heavy = pairwise_dephasing_rate(qa1, qb1, PARAMS, species=table)
        assert heavy == pytest.approx(4 * base, rel=1e-12)


class TestDensityOperator:
    def test_single_configuration(self):
        q = config((10.0, 0.0, 0.0))
        op = build_density_operator((0.0, 0.0, 0.0), [q], PARAMS)
        assert op.shape == (1, 1)
        assert op[0, 0] == pytest.approx(density_eigenvalue((0.0, 0.0, 0.0), q, PARAMS))

    def test_mirror_pair_equal_entries_at_center(self):
        qa = config((50.0, 0.0, 0.0))
        qb = config((-50.0, 0.0, 0.0))
        op = build_density_operator((0.0, 0.0, 0.0), [qa, qb], PARAMS)
        assert op[0, 0] == pytest.approx(op[1, 1], rel=1e-14)

    def test_spectrum_matches_eigenvalue_multiset(self):
        rng = np.random.default_rng(31)
        basis = [config(*[tuple(p) for p in rng.uniform(-100, 100, size=(2, 3))]) for _ in range(3)]
        x = (20.0, -10.0, 5.0)
        op = build_density_operator(x, basis, PARAMS)
        expected = sorted(density_eigenvalue(x, q, PARAMS) for q in basis)
        np.testing.assert_allclose(sorted(np.linalg.eigvalsh(op)), expected, rtol=1e-12)

    def test_operators_commute_exactly(self):
        rng = np.random.default_rng(37)
        basis = [config(*[tuple(p) for p in rng.uniform(-100, 100, size=(2, 3))]) for _ in range(4)]
        ops = [
            build_density_operator(tuple(x), basis, PARAMS)
            for x in rng.uniform(-200, 200, size=(3, 3))
        ]
        for a, b in itertools.combinations(ops, 2):
            assert np.array_equal(a @ b, b @ a)

    def test_duplicate_basis_rejected(self):
        q = config((0.0, 0.0, 0.0))
        with pytest.raises(ValidationError):
            build_density_operator((0.0, 0.0, 0.0), [q, q], PARAMS)


class TestDephasingMatrix:
    def test_singleton_basis(self):
        dm = build_dephasing_matrix([config((0.0, 0.0, 0.0))], PARAMS)
        assert dm.rates.shape == (1, 1)
        assert dm.rates[0, 0] == 0.0

    def test_mirror_pair_strictly_positive(self):
        qb = config((40.0, 25.0, -60.0))
        pair = mirror_construction((0.0, 0.0, 0.0), qb, [[True, True, True]], PARAMS)
        dm = build_dephasing_matrix([pair.q_a, pair.q_b], PARAMS)
        assert dm.rates[0, 1] > 0.0

    def test_permutation_symmetry(self):
        rng = np.random.default_rng(41)
        basis = [config(*[tuple(p) for p in rng.uniform(-100, 100, size=(1, 3))]) for _ in range(4)]
        dm = build_dephasing_matrix(basis, PARAMS)
        perm = [2, 0, 3, 1]
        dm_perm = build_dephasing_matrix([basis[i] for i in perm], PARAMS)
        np.testing.assert_allclose(dm_perm.rates, dm.rates[np.ix_(perm, perm)], rtol=1e-14)
