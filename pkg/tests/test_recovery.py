"""CTF reduction, greedy pursuit variants and support translation."""

import numpy as np
import pytest

from gpsacq.channel import GridSpec
from gpsacq.frontend import CompressedMeasurements, SensingMatrix
from gpsacq.recovery import (MmvProblem, ctf_reduce, omp_mmv, omp_smv,
                             raw_problem, refine_support, rembo,
                             solve_problem, support_to_acquisition)


def random_matrix(p, d, seed):
    rng = np.random.default_rng(seed)
    return SensingMatrix(entries=rng.standard_normal((p, d)),
                         kind="random_gaussian", seed=seed)


def sparse_instance(p, d, k, seed, n_cols=1, noise=0.0):
    rng = np.random.default_rng(seed)
    matrix = random_matrix(p, d, seed)
    support = np.sort(rng.choice(d, size=k, replace=False))
    coef = rng.standard_normal((k, n_cols)) + 1j * rng.standard_normal((k, n_cols))
    c = matrix.entries[:, support] @ coef
    if noise:
        c = c + noise * (rng.standard_normal(c.shape)
                         + 1j * rng.standard_normal(c.shape))
    return matrix, c, support


class TestCtf:
    def test_single_symbol_is_single_vector(self):
        matrix = random_matrix(8, 30, 0)
        c = np.arange(8, dtype=complex).reshape(8, 1)
        prob = ctf_reduce(CompressedMeasurements(c=c), matrix, 2)
        assert prob.observations.shape[1] == 1
        # frame spans the same direction, up to scale
        u = prob.observations[:, 0]
        cosine = abs(np.vdot(u, c[:, 0])) / (np.linalg.norm(u) * np.linalg.norm(c))
        assert cosine == pytest.approx(1.0, abs=1e-12)

    def test_scaled_copies_give_rank_one(self):
        rng = np.random.default_rng(1)
        v = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        c = np.outer(v, np.array([1.0, -2.0, 0.5, 3.0]))
        prob = ctf_reduce(c, random_matrix(10, 40, 1), 3)
        assert prob.observations.shape[1] == 1

    def test_noiseless_rank_bounded_by_sparsity(self):
        for seed in range(10):
            matrix, c, support = sparse_instance(24, 100, 5, seed, n_cols=12)
            prob = ctf_reduce(c, matrix, 5, rank_tol=1e-8)
            assert prob.observations.shape[1] <= 5

    def test_all_zero_flagged(self):
        prob = ctf_reduce(np.zeros((6, 4), dtype=complex),
                          random_matrix(6, 20, 0), 2)
        assert prob.empty
        est = solve_problem(prob)
        assert len(est.indices) == 0

    def test_max_rank_cap(self):
        matrix, c, _ = sparse_instance(20, 80, 6, 3, n_cols=10)
        prob = ctf_reduce(c, matrix, 6, max_rank=3)
        assert prob.observations.shape[1] <= 3


class TestOmpSmv:
    def test_single_column_recovered(self):
        matrix = random_matrix(12, 50, 2)
        est = omp_smv(matrix, matrix.entries[:, 17], 1)
        assert est.indices.tolist() == [17]
        assert est.residual_norm <= 1e-9 * np.linalg.norm(matrix.entries[:, 17])

    def test_zero_vector_empty_support(self):
        est = omp_smv(random_matrix(10, 30, 0), np.zeros(10), 3)
        assert len(est.indices) == 0
        assert est.residual_norm == 0.0

    def test_exact_recovery_rate(self):
        hits = 0
        for seed in range(100):
            matrix, c, support = sparse_instance(40, 200, 5, seed)
            est = omp_smv(matrix, c[:, 0], 5)
            hits += est.indices.tolist() == support.tolist()
        assert hits >= 95

    def test_residuals_non_increasing(self):
        for seed in range(50):
            matrix, c, _ = sparse_instance(30, 120, 6, seed, noise=0.5)
            est = omp_smv(matrix, c[:, 0], 8)
            hist = est.residual_history
            assert all(hist[t + 1] <= hist[t] * (1 + 1e-9) for t in range(len(hist) - 1))

    def test_no_reselection_and_cap(self):
        matrix, c, _ = sparse_instance(20, 60, 4, 7, noise=1.0)
        est = omp_smv(matrix, c[:, 0], 10)
        assert len(est.indices) == len(set(est.indices.tolist()))
        assert len(est.indices) <= 10

    def test_rank_deficient_subdictionary_regularized(self):
        rng = np.random.default_rng(4)
        col = rng.standard_normal(8)
        entries = np.stack([col, col, rng.standard_normal(8)], axis=1)
        matrix = SensingMatrix(entries=entries)
        est = omp_smv(matrix, col, 2)
        assert np.all(np.isfinite(est.coefficients))

    def test_sparsity_beyond_channels(self):
        with pytest.raises(ValueError):
            omp_smv(random_matrix(5, 20, 0), np.ones(5), 6)

    def test_coefficients_solve_restricted_ls(self):
        matrix, c, support = sparse_instance(25, 90, 4, 11)
        est = omp_smv(matrix, c[:, 0], 4)
        b_s = matrix.entries[:, est.indices]
        direct, *_ = np.linalg.lstsq(b_s, c[:, 0], rcond=None)
        assert np.allclose(est.coefficients[:, 0], direct, atol=1e-6)


class TestOmpMmv:
    def test_single_column_equals_smv(self):
        matrix, c, _ = sparse_instance(30, 100, 5, 5, noise=0.3)
        smv = omp_smv(matrix, c[:, 0], 5)
        mmv = omp_mmv(matrix, c[:, :1], 5)
        assert np.array_equal(smv.indices, mmv.indices)
        assert np.allclose(smv.coefficients, mmv.coefficients)

    def test_orthogonal_subdictionary_one_pass(self):
        rng = np.random.default_rng(6)
        q, _ = np.linalg.qr(rng.standard_normal((20, 4)))
        entries = np.concatenate([q, 0.1 * rng.standard_normal((20, 30))], axis=1)
        matrix = SensingMatrix(entries=entries)
        coef = rng.standard_normal((4, 3))
        c = q @ coef
        est = omp_mmv(matrix, c, 4)
        assert est.indices.tolist() == [0, 1, 2, 3]
        assert est.residual_norm <= 1e-9 * np.linalg.norm(c)

    def test_mmv_rate_at_least_smv_rate(self):
        smv_hits = mmv_hits = 0
        for seed in range(60):
            matrix, c, support = sparse_instance(40, 200, 5, seed, n_cols=5,
                                                 noise=0.8)
            smv_hits += omp_smv(matrix, c[:, 0], 5).indices.tolist() == support.tolist()
            mmv_hits += omp_mmv(matrix, c, 5).indices.tolist() == support.tolist()
        assert mmv_hits >= smv_hits


class TestRembo:
    def test_rank_one_matches_smv_support(self):
        matrix, c, support = sparse_instance(30, 100, 4, 9)
        boosted = rembo(matrix, c, 4, boosts=5, seed=1)
        assert boosted.indices.tolist() == support.tolist()

    def test_noiseless_terminates_on_first_boost(self):
        matrix, c, support = sparse_instance(40, 150, 5, 12, n_cols=6)
        from gpsacq.opcount import OpCounter
        counter = OpCounter()
        est = rembo(matrix, c, 5, boosts=20, seed=3, counter=counter)
        assert est.indices.tolist() == support.tolist()
        # only one inner solve ran: five selection rounds of P*D each
        assert counter.get("omp3_max_projection") == 5 * matrix.dims

    def test_single_boost_single_solve(self):
        matrix, c, _ = sparse_instance(20, 80, 3, 2, noise=2.0)
        from gpsacq.opcount import OpCounter
        counter = OpCounter()
        rembo(matrix, c, 3, boosts=1, seed=0, counter=counter)
        assert counter.get("omp3_max_projection") == 3 * matrix.dims

    def test_deterministic_in_seed(self):
        matrix, c, _ = sparse_instance(25, 90, 4, 8, n_cols=4, noise=1.5)
        a = rembo(matrix, c, 4, boosts=10, seed=77)
        b = rembo(matrix, c, 4, boosts=10, seed=77)
        assert np.array_equal(a.indices, b.indices)
        assert a.residual_norm == b.residual_norm

    def test_boosts_validation(self):
        matrix, c, _ = sparse_instance(10, 30, 2, 0)
        with pytest.raises(ValueError):
            rembo(matrix, c, 2, boosts=0)


class TestRefineSupport:
    def test_never_increases_residual(self):
        for seed in range(30):
            matrix, c, _ = sparse_instance(30, 120, 6, seed, noise=1.0)
            est = omp_mmv(matrix, c, 6)
            refined = refine_support(matrix, c, est)
            assert refined.residual_norm <= est.residual_norm * (1 + 1e-12)

    def test_recovers_swapped_atom(self):
        matrix, c, support = sparse_instance(40, 150, 5, 21)
        est = omp_smv(matrix, c[:, 0], 5)
        # corrupt one atom and let the exchange pass repair it
        bad = np.array(est.indices)
        bad[0] = (bad[0] + 7) % matrix.dims
        corrupted = omp_smv(matrix, c[:, 0], 5)
        corrupted.indices = np.sort(bad)
        from gpsacq.recovery import _restricted_least_squares
        coef, resid = _restricted_least_squares(
            matrix.entries[:, corrupted.indices], c)
        corrupted.coefficients = coef
        corrupted.residual_norm = float(np.linalg.norm(resid))
        refined = refine_support(matrix, c, corrupted)
        assert refined.indices.tolist() == support.tolist()


class TestSupportToAcquisition:
    @pytest.fixture(scope="module")
    def grid(self):
        return GridSpec(m0=127, oversample=2, delta_tau_chips=0.5,
                        n_delay_bins=9, k_half=2)

    def make_estimate(self, grid, entries):
        """entries: list of (sat, k, q, energy)."""
        from gpsacq.recovery import SupportEstimate
        idx = np.array([grid.flat_index(s - 1, k + grid.k_half, q)
                        for s, k, q, _ in entries])
        coef = np.sqrt(np.array([[e] for *_rest, e in entries], dtype=complex))
        order = np.argsort(idx)
        return SupportEstimate(indices=idx[order], coefficients=coef[order],
                               residual_norm=0.0)

    def test_ground_truth_support_exact(self, grid):
        truth = [(1, -1, 3, 4.0), (1, 2, 7, 1.0), (4, 0, 2, 9.0), (4, 1, 8, 0.5)]
        est = self.make_estimate(grid, truth)
        result = support_to_acquisition(est, grid, 2, 2, n_sats=5)
        assert result.detected_set == {1, 4}
        assert not result.partial
        best = {d.sat: (d.q_bin, d.k_bin) for d in result.detections}
        assert best[1] == (3, -1)
        assert best[4] == (2, 0)

    def test_concentrated_support_flags_partial(self, grid):
        est = self.make_estimate(grid, [(2, 0, q, 1.0) for q in range(4)])
        result = support_to_acquisition(est, grid, 4, 2, n_sats=5)
        assert result.partial
        assert result.detected_set == {2}

    def test_index_outside_dictionary(self, grid):
        est = self.make_estimate(grid, [(5, 2, 8, 1.0)])
        with pytest.raises(ValueError):
            support_to_acquisition(est, grid, 1, 1, n_sats=2)


def test_identifiability_at_twice_sparsity():
    # with P = 2|S| and generic gaussian columns the restricted system is
    # full column rank nearly always
    full_rank = 0
    for seed in range(100):
        matrix, _, support = sparse_instance(16, 300, 8, seed)
        sub = matrix.entries[:, support]
        full_rank += np.linalg.matrix_rank(sub) == 8
    assert full_rank >= 99


def test_ctf_and_raw_supports_agree_noiseless():
    agree = 0
    for seed in range(40):
        matrix, c, support = sparse_instance(30, 120, 5, seed, n_cols=8)
        est_raw = solve_problem(raw_problem(c, matrix, 5))
        est_ctf = solve_problem(ctf_reduce(c, matrix, 5))
        agree += est_raw.indices.tolist() == est_ctf.indices.tolist()
    assert agree >= 38
