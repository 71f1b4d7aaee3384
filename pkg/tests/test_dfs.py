import numpy as np
import pytest

from csllab.core import CslParams, LindbladModel, ParticleConfiguration, PreconditionError
from csllab.dfs import (
    csl_dfs_scan,
    default_probe_points,
    is_dfs,
    joint_degenerate_subspaces,
    lindblad_residual,
    report_to_json,
)
from csllab.nogo import mirror_construction

PARAMS = CslParams.from_rc(100.0, 1e-9, dim=3)

COLLECTIVE_DEPHASING = np.diag([0.0, 1.0, 1.0, 2.0])


def config(*points):
    return ParticleConfiguration.from_points(points)


def random_commuting_family(rng, k, m, max_label=3):
    """Hermitian commuting family sharing one random eigenbasis; integer labels
    with repeats create genuine joint degeneracies."""
    u, _ = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))
    ops = []
    labels = []
    for _ in range(m):
        diag = rng.integers(0, max_label, size=k).astype(float)
        labels.append(diag)
        ops.append(u @ np.diag(diag) @ u.conj().T)
    return ops, u, np.array(labels)


def random_psd(rng, m):
    b = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return b @ b.conj().T / m


class TestJointDegenerateSubspaces:
    def test_collective_dephasing_number_operator(self):
        subs = joint_degenerate_subspaces([COLLECTIVE_DEPHASING])
        dims = {s.eigenvalues[0].real: s.dim for s in subs}
        assert dims == {0.0: 1, 1.0: 2, 2.0: 1}
        middle = next(s for s in subs if s.dim == 2)
        # spans exactly the |01>, |10> plane
        proj = middle.basis @ middle.basis.conj().T
        expected = np.zeros((4, 4))
        expected[1, 1] = expected[2, 2] = 1.0
        np.testing.assert_allclose(proj, expected, atol=1e-12)

    def test_identity_gives_full_space(self):
        subs = joint_degenerate_subspaces([np.eye(5)])
        assert len(subs) == 1
        assert subs[0].dim == 5

    def test_two_operators_split_everything(self):
        subs = joint_degenerate_subspaces([np.diag([1.0, 1.0, 2.0]), np.diag([1.0, 2.0, 2.0])])
        assert sorted(s.dim for s in subs) == [1, 1, 1]
        tuples = sorted(tuple(c.real for c in s.eigenvalues) for s in subs)
        assert tuples == [(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)]

    def test_completeness_and_soundness(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            k = int(rng.integers(2, 7))
            m = int(rng.integers(1, 4))
            ops, _, _ = random_commuting_family(rng, k, m)
            subs = joint_degenerate_subspaces(ops)
            assert sum(s.dim for s in subs) == k
            for s in subs:
                ok, residual = is_dfs(s.basis, ops)
                assert ok
                assert residual <= 1e-8

    def test_output_order_is_canonical(self):
        rng = np.random.default_rng(29)
        ops, _, _ = random_commuting_family(rng, 5, 2)
        subs1 = joint_degenerate_subspaces(ops)
        subs2 = joint_degenerate_subspaces(ops)
        assert [s.eigenvalues for s in subs1] == [s.eigenvalues for s in subs2]

    def test_non_hermitian_rejected(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(PreconditionError, match="Hermitian"):
            joint_degenerate_subspaces([bad])

    def test_non_commuting_rejected_naming_pair(self):
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        sz = np.diag([1.0, -1.0])
        with pytest.raises(PreconditionError, match="0 and 1"):
            joint_degenerate_subspaces([sx, sz])


class TestIsDfs:
    def test_encoded_plane_is_dfs(self):
        basis = np.zeros((4, 2))
        basis[1, 0] = 1.0
        basis[2, 1] = 1.0
        ok, residual = is_dfs(basis, [COLLECTIVE_DEPHASING])
        assert ok and residual <= 1e-12

    def test_outer_plane_is_not(self):
        basis = np.zeros((4, 2))
        basis[0, 0] = 1.0
        basis[3, 1] = 1.0
        ok, _ = is_dfs(basis, [COLLECTIVE_DEPHASING])
        assert not ok

    def test_single_eigenvector(self):
        vec = np.zeros((4, 1))
        vec[3, 0] = 1.0
        ok, residual = is_dfs(vec, [COLLECTIVE_DEPHASING])
        assert ok and residual <= 1e-12

    def test_rank_deficient_basis_rejected(self):
        v = np.zeros((4, 2))
        v[1, 0] = 1.0
        v[1, 1] = 1.0
        with pytest.raises(PreconditionError, match="rank"):
            is_dfs(v, [COLLECTIVE_DEPHASING])


class TestLindbladResidual:
    MODEL = LindbladModel(
        hamiltonian=np.zeros((4, 4)),
        jump_ops=(COLLECTIVE_DEPHASING.astype(complex),),
        coupling=np.eye(1),
    )

    def test_encoded_state_is_stationary(self):
        psi = np.zeros(4, dtype=complex)
        psi[1] = psi[2] = 2**-0.5
        rho = np.outer(psi, psi.conj())
        assert lindblad_residual(rho, self.MODEL) <= 1e-10

    def test_straddling_coherence_decays(self):
        rho = np.full((4, 4), 0.25, dtype=complex) * np.eye(4)
        rho[0, 3] = rho[3, 0] = 0.2
        assert lindblad_residual(rho, self.MODEL) > 1e-6

    def test_no_jumps_means_zero(self):
        model = LindbladModel(np.zeros((3, 3)), (), np.zeros((0, 0)))
        rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
        assert lindblad_residual(rho, model) == 0.0


class TestTheoremOneConsistency:
    def test_states_on_joint_subspaces_are_stationary(self):
        rng = np.random.default_rng(43)
        for _ in range(10):
            k = int(rng.integers(3, 7))
            m = int(rng.integers(1, 4))
            ops, _, _ = random_commuting_family(rng, k, m)
            subs = joint_degenerate_subspaces(ops)
            coupling = random_psd(rng, m)
            model = LindbladModel(np.zeros((k, k)), tuple(ops), coupling)
            for s in subs:
                if s.dim < 2:
                    continue
                weights = rng.dirichlet(np.ones(s.dim))
                rho = (s.basis * weights) @ s.basis.conj().T
                assert lindblad_residual(rho, model) <= 1e-8

    def test_states_straddling_subspaces_decay(self):
        rng = np.random.default_rng(47)
        found = 0
        for _ in range(10):
            k = int(rng.integers(3, 7))
            m = int(rng.integers(1, 4))
            ops, _, _ = random_commuting_family(rng, k, m)
            subs = joint_degenerate_subspaces(ops)
            if len(subs) < 2:
                continue
            found += 1
            v = (subs[0].basis[:, 0] + subs[1].basis[:, 0]) / np.sqrt(2)
            rho = np.outer(v, v.conj())
            coupling = random_psd(rng, m)
            model = LindbladModel(np.zeros((k, k)), tuple(ops), coupling)
            assert lindblad_residual(rho, model) > 1e-6
        assert found >= 5


class TestCslDfsScan:
    def test_single_probe_keeps_mirror_degeneracy(self):
        pair = mirror_construction(
            (0.0, 0.0, 0.0), config((70.0, 30.0, -20.0)), [[True, True, True]], PARAMS
        )
        report = csl_dfs_scan([pair.q_a, pair.q_b], [pair.anchor], PARAMS)
        assert report.max_dimension == 2
        assert max(report.residuals) <= 1e-8

    def test_adding_particle_center_probe_breaks_it(self):
        pair = mirror_construction(
            (0.0, 0.0, 0.0), config((70.0, 30.0, -20.0)), [[True, True, True]], PARAMS
        )
        probes = [pair.anchor, pair.q_b.particles[0].pos]
        report = csl_dfs_scan([pair.q_a, pair.q_b], probes, PARAMS)
        assert report.max_dimension == 1

    def test_single_configuration_trivial(self):
        report = csl_dfs_scan([config((0.0, 0.0, 0.0))], [(0.0, 0.0, 0.0), (50.0, 0.0, 0.0)], PARAMS)
        assert report.max_dimension == 1
        assert len(report.subspaces) == 1

    def test_no_dfs_for_generic_bases(self):
        rng = np.random.default_rng(53)
        for _ in range(10):
            n_configs = int(rng.integers(2, 5))
            basis = [
                config(*[tuple(p) for p in rng.uniform(-150, 150, size=(rng.integers(1, 4), 3))])
                for _ in range(n_configs)
            ]
            probes = default_probe_points(basis, PARAMS, seed=int(rng.integers(2**32)))
            report = csl_dfs_scan(basis, probes, PARAMS)
            assert report.max_dimension == 1

    def test_two_generic_probes_suffice(self):
        rng = np.random.default_rng(59)
        basis = [config(*[tuple(p) for p in rng.uniform(-150, 150, size=(2, 3))]) for _ in range(3)]
        probes = [tuple(p) for p in rng.uniform(-200, 200, size=(2, 3))]
        report = csl_dfs_scan(basis, probes, PARAMS)
        assert report.max_dimension == 1

    def test_report_json_shape(self):
        report = csl_dfs_scan(
            [config((0.0, 0.0, 0.0)), config((90.0, 0.0, 0.0))],
            [(0.0, 0.0, 0.0), (90.0, 0.0, 0.0)],
            PARAMS,
        )
        doc = report_to_json(report)
        assert set(doc) == {"subspaces", "max_dimension"}
        assert all(set(s) == {"dim", "eigenvalues", "residual"} for s in doc["subspaces"])
        assert doc["max_dimension"] == 1
