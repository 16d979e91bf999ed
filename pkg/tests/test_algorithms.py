"""Stream SGD variants: windows, sample indexing, coupling, and batch parity."""

import math

import numpy as np
import pytest

from markovsgd.algorithms import (
    BatchResult,
    DataDropConfig,
    ParallelConfig,
    ReplayConfig,
    SgdConfig,
    recommended_drop_interval,
    recommended_parallel_instances,
    resolve_drop_interval,
    run_lower_bound_trace,
    run_lower_bound_traces,
    run_many,
    run_parallel_sgd,
    run_sgd,
    run_sgd_dd,
    run_sgd_er,
    sgd_step,
    tail_window,
    theory_drop_prefix,
)
from markovsgd.chains import (
    GaussianARSpec,
    GaussianPathCursor,
    make_agnostic_bias_chain,
    make_iid_chain,
    make_mc3,
    run_generators,
)
from markovsgd.regression import (
    AgnosticDeterministic,
    IndependentGaussian,
    Noiseless,
    Observation,
    excess_risk,
    make_problem,
)


def gaussian_problem(d=4, eps=0.3, sigma=0.1, w_star=None):
    w = np.linspace(0.1, 0.4, d) if w_star is None else np.asarray(w_star, float)
    noise = Noiseless() if sigma == 0.0 else IndependentGaussian(sigma=sigma)
    return make_problem(GaussianARSpec(dim=d, epsilon=eps), noise, w_star=w)


def finite_problem(sigma=0.1):
    noise = Noiseless() if sigma == 0.0 else IndependentGaussian(sigma=sigma)
    return make_problem(make_mc3(2.0, 0.05), noise, w_star=np.array([0.5, -0.5]))


# ---------------------------------------------------------------------------
# Windows and schedule helpers
# ---------------------------------------------------------------------------


class TestHelpers:
    @pytest.mark.parametrize(
        "n,f,expected",
        [
            (4, 0.5, (2, 2)),
            (10, 0.3, (7, 3)),
            (1, 1.0, (0, 1)),
            (5, 1.0, (0, 5)),
            (7, 0.5, (3, 4)),
        ],
    )
    def test_tail_window(self, n, f, expected):
        assert tail_window(n, f) == expected

    def test_tail_window_validation(self):
        with pytest.raises(ValueError):
            tail_window(10, 0.0)
        with pytest.raises(ValueError):
            tail_window(10, 1.5)
        with pytest.raises(ValueError):
            tail_window(0, 0.5)

    def test_drop_interval_goldens(self):
        assert recommended_drop_interval(7, 1024) == 350
        assert recommended_drop_interval(7, 10**6) == 700
        # formula check with an awkward log2
        assert recommended_drop_interval(3, 1000, 2.0) == 3 * math.ceil(
            2.0 * math.log2(1000)
        )

    def test_parallel_instances_goldens(self):
        assert recommended_parallel_instances(7, 2 * 10**5) == 742
        assert recommended_parallel_instances(26, 2 * 10**5) == 2756
        with pytest.raises(ValueError):
            recommended_parallel_instances(7, 1000, rate_constant=5.0)

    def test_theory_drop_prefix_golden(self):
        got = theory_drop_prefix(10, 0.01, 10**4)
        assert got == 597488
        want = math.ceil(
            2.0 / 0.01**2 * math.log(300000.0 * math.pi * 10 * 10**4 / 0.01)
        )
        assert got == want
        # far larger than any practical buffer, hence the drop_prefix=0 default
        assert got > 10**4

    def test_derived_drop_interval_uses_mixing_time(self):
        problem = finite_problem()  # tau_mix = 7
        cfg = DataDropConfig(SgdConfig(step_size=0.25))
        assert resolve_drop_interval(cfg, problem, 1024) == 350
        explicit = DataDropConfig(SgdConfig(step_size=0.25), drop_interval=11)
        assert resolve_drop_interval(explicit, problem, 1024) == 11

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SgdConfig(step_size=0.0)
        with pytest.raises(ValueError):
            SgdConfig(step_size=0.1, tail_fraction=0.0)
        with pytest.raises(ValueError):
            DataDropConfig(SgdConfig(step_size=0.1), drop_interval=0)
        with pytest.raises(ValueError):
            ParallelConfig(SgdConfig(step_size=0.1), num_instances=0)
        with pytest.raises(ValueError):
            ReplayConfig(buffer_size=0)
        with pytest.raises(ValueError):
            ReplayConfig(buffer_size=4, drop_prefix=-1)
        assert ReplayConfig(buffer_size=4, drop_prefix=2).span == 6


# ---------------------------------------------------------------------------
# Single-step reference
# ---------------------------------------------------------------------------


class TestSgdStep:
    def test_matches_formula(self):
        rng = np.random.default_rng(2)
        w = rng.standard_normal(6)
        x = rng.standard_normal(6)
        obs = Observation(x=x, y=0.7)
        got = sgd_step(w, obs, 0.3)
        want = w - 0.3 * (w @ x - 0.7) * x
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            sgd_step(np.zeros(3), Observation(x=np.zeros(4), y=0.0), 0.1)

    def test_engine_agrees_step_by_step(self):
        # replay the engine's exact sample stream through the scalar step
        problem = gaussian_problem(d=5, eps=0.4, sigma=0.0, w_star=np.zeros(5))
        w_init = np.ones(5)
        run = run_sgd(problem, 3, SgdConfig(step_size=0.2), 31, w_init=w_init)
        X = GaussianPathCursor(problem.chain, [run_generators(31)[0]]).take(3)[:, 0, :]
        w = w_init
        for t, x in enumerate(X, start=1):
            w = sgd_step(w, Observation(x=x, y=0.0), 0.2)
            np.testing.assert_array_equal(run.iterates[t], w)


# ---------------------------------------------------------------------------
# Tail-averaged SGD
# ---------------------------------------------------------------------------


class TestSgd:
    def test_window_and_estimate_small(self):
        # T=4, f=1/2: average w_3 and w_4, never the post-final w_5
        problem = finite_problem()
        run = run_sgd(problem, 4, SgdConfig(step_size=0.3), 7, record_reads=True)
        assert run.window == (2, 2)
        assert run.iterates.shape == (5, 2)
        np.testing.assert_array_equal(
            run.estimate, (run.iterates[2] + run.iterates[3]) / 2.0
        )
        np.testing.assert_array_equal(run.sample_reads, [1, 2, 3, 4])
        assert run.discarded_samples == 0

    def test_estimate_matches_window_rows(self):
        problem = gaussian_problem()
        run = run_sgd(problem, 50, SgdConfig(step_size=0.2, tail_fraction=0.3), 19)
        lo, count = run.window
        assert (lo, count) == tail_window(50, 0.3)
        np.testing.assert_allclose(
            run.estimate, run.iterates[lo : lo + count].mean(axis=0), rtol=1e-13
        )

    def test_t_validation(self):
        with pytest.raises(ValueError):
            run_sgd(finite_problem(), 1, SgdConfig(step_size=0.1), 0)

    def test_keep_iterates_off(self):
        problem = finite_problem()
        full = run_sgd(problem, 20, SgdConfig(step_size=0.2), 3)
        slim = run_sgd(problem, 20, SgdConfig(step_size=0.2), 3, keep_iterates=False)
        assert slim.iterates is None
        np.testing.assert_array_equal(slim.estimate, full.estimate)


# ---------------------------------------------------------------------------
# Data-drop SGD
# ---------------------------------------------------------------------------


class TestDataDrop:
    def test_update_schedule_and_window(self):
        # T=10, K=3: updates on samples 3, 6, 9; sample 10 discarded.
        # n=3 updates, f=1/2: average the rows after updates 2 and 3.
        problem = finite_problem()
        cfg = DataDropConfig(SgdConfig(step_size=0.3), drop_interval=3)
        run = run_sgd_dd(problem, 10, cfg, 7, record_reads=True)
        np.testing.assert_array_equal(run.sample_reads, [3, 6, 9])
        assert run.discarded_samples == 1
        assert run.window == (2, 2)
        assert run.iterates.shape == (4, 2)
        np.testing.assert_array_equal(
            run.estimate, (run.iterates[2] + run.iterates[3]) / 2.0
        )

    def test_final_iterate_is_averaged(self):
        # unlike plain SGD the last row is inside the window
        problem = finite_problem()
        cfg = DataDropConfig(SgdConfig(step_size=0.3), drop_interval=2)
        run = run_sgd_dd(problem, 12, cfg, 11)
        lo, count = run.window
        assert lo + count == len(run.iterates)

    def test_k_exceeding_horizon(self):
        cfg = DataDropConfig(SgdConfig(step_size=0.3), drop_interval=11)
        with pytest.raises(ValueError):
            run_sgd_dd(finite_problem(), 10, cfg, 0)

    @pytest.mark.parametrize("problem", [gaussian_problem(), finite_problem()], ids=["gauss", "mc3"])
    def test_k1_equals_plain_sgd(self, problem):
        # with K=1 the two engines must agree bit for bit
        sgd = run_sgd(problem, 40, SgdConfig(step_size=0.25), 13)
        dd = run_sgd_dd(
            problem, 40, DataDropConfig(SgdConfig(step_size=0.25), drop_interval=1), 13
        )
        np.testing.assert_array_equal(dd.iterates, sgd.iterates)
        # windows differ by one row (dd averages through the final iterate)
        assert dd.window == (sgd.window[0] + 1, sgd.window[1])

    def test_state_consumption_is_contiguous(self):
        # T=11 and T=9 run the same three updates: the tail of the stream
        # beyond n_upd * K is never drawn
        problem = gaussian_problem()
        cfg = DataDropConfig(SgdConfig(step_size=0.3), drop_interval=3)
        a = run_sgd_dd(problem, 11, cfg, 5)
        b = run_sgd_dd(problem, 9, cfg, 5)
        np.testing.assert_array_equal(a.iterates, b.iterates)
        assert a.discarded_samples == 2
        assert b.discarded_samples == 0


# ---------------------------------------------------------------------------
# Parallel SGD
# ---------------------------------------------------------------------------


class TestParallel:
    def test_sample_grid_and_window(self):
        # T=12, K=3: rounds feed instances samples [[1,2,3],[4,5,6],...]
        problem = finite_problem()
        cfg = ParallelConfig(SgdConfig(step_size=0.3), num_instances=3)
        run = run_parallel_sgd(problem, 12, cfg, 7, record_reads=True)
        np.testing.assert_array_equal(
            run.sample_reads, np.arange(1, 13).reshape(4, 3)
        )
        np.testing.assert_array_equal(run.sample_reads[:, 1], [2, 5, 8, 11])
        assert run.window == (2, 2)
        assert run.iterates.shape == (5, 3, 2)
        est = (run.iterates[2] + run.iterates[3]).sum(axis=0) / 6.0
        np.testing.assert_allclose(run.estimate, est, rtol=1e-13)

    def test_horizon_truncated_to_round_multiple(self):
        problem = finite_problem()
        cfg = ParallelConfig(SgdConfig(step_size=0.3), num_instances=3)
        a = run_parallel_sgd(problem, 13, cfg, 5)
        b = run_parallel_sgd(problem, 12, cfg, 5)
        np.testing.assert_array_equal(a.iterates, b.iterates)
        assert a.discarded_samples == 1

    def test_too_many_instances(self):
        cfg = ParallelConfig(SgdConfig(step_size=0.3), num_instances=3)
        with pytest.raises(ValueError):
            run_parallel_sgd(finite_problem(), 5, cfg, 0)

    def test_initial_points_shape(self):
        bad = ParallelConfig(
            SgdConfig(step_size=0.3),
            num_instances=3,
            initial_points=np.zeros((3, 5)),
        )
        with pytest.raises(ValueError):
            run_parallel_sgd(finite_problem(), 12, bad, 0)

    def test_explicit_initial_points_used(self):
        problem = gaussian_problem(d=3, sigma=0.0, w_star=np.zeros(3))
        pts = np.arange(9.0).reshape(3, 3) / 10.0
        cfg = ParallelConfig(SgdConfig(step_size=0.2), num_instances=3, initial_points=pts)
        run = run_parallel_sgd(problem, 12, cfg, 21)
        np.testing.assert_array_equal(run.iterates[0], pts)


# ---------------------------------------------------------------------------
# Experience-replay SGD
# ---------------------------------------------------------------------------


class TestReplay:
    def test_requires_gaussian_chain(self):
        with pytest.raises(ValueError):
            run_sgd_er(finite_problem(), 20, ReplayConfig(buffer_size=4), 0)

    def test_span_exceeding_horizon(self):
        cfg = ReplayConfig(buffer_size=8, drop_prefix=3)
        with pytest.raises(ValueError):
            run_sgd_er(gaussian_problem(), 10, cfg, 0)

    def test_window_and_estimate(self):
        # T=20, B=3, u=2: S=5, four buffers, last ceil(4/2)=2 averaged
        problem = gaussian_problem()
        cfg = ReplayConfig(buffer_size=3, drop_prefix=2, step_size=0.3)
        run = run_sgd_er(problem, 20, cfg, 9)
        assert run.iterates.shape == (4, 4)
        assert run.window == (2, 2)
        assert run.discarded_samples == 0
        np.testing.assert_array_equal(
            run.estimate, (run.iterates[2] + run.iterates[3]) / 2.0
        )

    def test_replayed_indices_stay_in_pool(self):
        # every replayed sample must come from its buffer's retained block
        problem = gaussian_problem()
        cfg = ReplayConfig(buffer_size=3, drop_prefix=2, step_size=0.3)
        run = run_sgd_er(problem, 20, cfg, 9, record_reads=True)
        reads = run.sample_reads.reshape(4, 3)
        for j, block in enumerate(reads):
            lo = j * 5 + 2  # u samples dropped at the head of buffer j+1
            assert np.all(block >= lo + 1)
            assert np.all(block <= (j + 1) * 5)

    def test_unit_buffer_reduces_to_sgd(self):
        # B=1, u=0 leaves a single candidate per buffer: the fresh sample
        problem = gaussian_problem(sigma=0.1)
        sgd = run_sgd(problem, 30, SgdConfig(step_size=0.3), 17)
        er = run_sgd_er(problem, 30, ReplayConfig(buffer_size=1, step_size=0.3), 17)
        np.testing.assert_array_equal(er.iterates, sgd.iterates[1:])

    def test_replay_reuses_buffer_samples(self):
        # with a large buffer some samples are replayed more than once
        problem = gaussian_problem()
        cfg = ReplayConfig(buffer_size=16, step_size=0.3)
        run = run_sgd_er(problem, 32, cfg, 3, record_reads=True)
        assert len(run.sample_reads) == 32
        assert len(np.unique(run.sample_reads)) < 32


# ---------------------------------------------------------------------------
# Exact fixed points and coupled decompositions
# ---------------------------------------------------------------------------


def _run_all_four(problem, seed, *, w_init, coupled):
    alpha = SgdConfig(step_size=0.3)
    return {
        "sgd": run_sgd(problem, 48, alpha, seed, w_init=w_init, coupled=coupled),
        "dd": run_sgd_dd(
            problem,
            48,
            DataDropConfig(alpha, drop_interval=3),
            seed,
            w_init=w_init,
            coupled=coupled,
        ),
        "parallel": run_parallel_sgd(
            problem,
            48,
            ParallelConfig(alpha, num_instances=4),
            seed,
            w_init=w_init,
            coupled=coupled,
        ),
        "er": run_sgd_er(
            problem,
            48,
            ReplayConfig(buffer_size=4, drop_prefix=2, step_size=0.3),
            seed,
            w_init=w_init,
            coupled=coupled,
        ),
    }


class TestFixedPointAndCoupling:
    def test_noiseless_start_at_optimum_is_exact(self):
        # w* is an exact fixed point: every iterate equals w* bit for bit
        w_star = np.array([0.3, -0.2, 0.1, 0.25])
        problem = gaussian_problem(sigma=0.0, w_star=w_star)
        runs = _run_all_four(problem, 23, w_init=w_star, coupled=False)
        np.testing.assert_array_equal(
            runs["sgd"].iterates, np.broadcast_to(w_star, (49, 4))
        )
        np.testing.assert_array_equal(
            runs["dd"].iterates, np.broadcast_to(w_star, (17, 4))
        )
        np.testing.assert_array_equal(
            runs["parallel"].iterates, np.broadcast_to(w_star, (13, 4, 4))
        )
        np.testing.assert_array_equal(
            runs["er"].iterates, np.broadcast_to(w_star, (8, 4))
        )
        for run in runs.values():
            np.testing.assert_allclose(run.estimate, w_star, rtol=1e-14)

    def test_coupled_decomposition_all_algorithms(self):
        problem = gaussian_problem(sigma=0.2)
        w1 = np.array([0.5, 0.0, -0.5, 0.2])
        runs = _run_all_four(problem, 29, w_init=w1, coupled=True)
        for name, run in runs.items():
            assert run.coupled is not None, name
            assert run.coupled.check_identity(tol=1e-9), name
            np.testing.assert_array_equal(run.coupled.iterates_full, run.iterates)

    def test_coupling_needs_iterates(self):
        with pytest.raises(ValueError):
            run_sgd(
                finite_problem(),
                10,
                SgdConfig(step_size=0.2),
                0,
                coupled=True,
                keep_iterates=False,
            )

    def test_coupling_does_not_disturb_the_run(self):
        # the bias/var branches share the full branch's streams exactly
        problem = gaussian_problem(sigma=0.2)
        cfg = ReplayConfig(buffer_size=4, step_size=0.3)
        plain = run_sgd_er(problem, 40, cfg, 37)
        coupled = run_sgd_er(problem, 40, cfg, 37, coupled=True)
        np.testing.assert_array_equal(coupled.iterates, plain.iterates)
        np.testing.assert_array_equal(coupled.estimate, plain.estimate)


# ---------------------------------------------------------------------------
# Batched runs
# ---------------------------------------------------------------------------


class TestRunMany:
    SEEDS = [101, 102, 103]

    @pytest.mark.parametrize(
        "cfg,runner",
        [
            (SgdConfig(step_size=0.3), run_sgd),
            (DataDropConfig(SgdConfig(step_size=0.3), drop_interval=3), run_sgd_dd),
            (ParallelConfig(SgdConfig(step_size=0.3), num_instances=4), run_parallel_sgd),
            (ReplayConfig(buffer_size=4, drop_prefix=2, step_size=0.3), run_sgd_er),
        ],
        ids=["sgd", "dd", "parallel", "er"],
    )
    def test_batch_matches_single_runs(self, cfg, runner):
        problem = gaussian_problem(sigma=0.1)
        batch = run_many(problem, 48, cfg, self.SEEDS)
        assert isinstance(batch, BatchResult)
        assert batch.estimates.shape == (3, 4)
        for i, seed in enumerate(self.SEEDS):
            single = runner(problem, 48, cfg, seed)
            np.testing.assert_array_equal(batch.estimates[i], single.estimate)

    def test_final_iterates_match_singles(self):
        problem = gaussian_problem(sigma=0.1)
        cfg = SgdConfig(step_size=0.3)
        batch = run_many(problem, 30, cfg, self.SEEDS)
        for i, seed in enumerate(self.SEEDS):
            single = run_sgd(problem, 30, cfg, seed)
            np.testing.assert_array_equal(batch.final_iterates[i], single.iterates[-1])

    def test_parallel_final_is_instance_mean(self):
        problem = gaussian_problem(sigma=0.1)
        cfg = ParallelConfig(SgdConfig(step_size=0.3), num_instances=4)
        batch = run_many(problem, 48, cfg, self.SEEDS)
        single = run_parallel_sgd(problem, 48, cfg, self.SEEDS[0])
        np.testing.assert_array_equal(
            batch.final_iterates[0], single.iterates[-1].mean(axis=0)
        )

    def test_checkpoint_excess_matches_iterates(self):
        problem = gaussian_problem(sigma=0.1)
        cfg = SgdConfig(step_size=0.3)
        batch = run_many(problem, 20, cfg, self.SEEDS, checkpoints=[0, 7, 20])
        np.testing.assert_array_equal(batch.checkpoint_steps, [0, 7, 20])
        assert batch.checkpoint_excess.shape == (3, 3)
        for i, seed in enumerate(self.SEEDS):
            single = run_sgd(problem, 20, cfg, seed)
            for c, t in enumerate([0, 7, 20]):
                want = excess_risk(problem, single.iterates[t])
                assert batch.checkpoint_excess[c, i] == want

    def test_replay_checkpoints_land_on_buffers(self):
        problem = gaussian_problem(sigma=0.1)
        cfg = ReplayConfig(buffer_size=5, step_size=0.3)
        batch = run_many(problem, 40, cfg, self.SEEDS, checkpoints=[0, 12, 40])
        single = run_sgd_er(problem, 40, cfg, self.SEEDS[0])
        # 12 samples = 2 whole buffers; 40 samples = all 8
        assert batch.checkpoint_excess[1, 0] == excess_risk(problem, single.iterates[1])
        assert batch.checkpoint_excess[2, 0] == excess_risk(problem, single.iterates[7])

    def test_unknown_config_type(self):
        with pytest.raises(TypeError):
            run_many(finite_problem(), 20, object(), [0, 1])

    def test_repeat_is_deterministic(self):
        problem = finite_problem()
        cfg = SgdConfig(step_size=0.3)
        a = run_many(problem, 25, cfg, self.SEEDS)
        b = run_many(problem, 25, cfg, self.SEEDS)
        np.testing.assert_array_equal(a.estimates, b.estimates)

    def test_per_run_initial_points(self):
        problem = gaussian_problem(sigma=0.1)
        cfg = SgdConfig(step_size=0.3)
        starts = np.array([[0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]])
        batch = run_many(problem, 20, cfg, [11, 12], w_init=starts)
        for i, seed in enumerate([11, 12]):
            single = run_sgd(problem, 20, cfg, seed, w_init=starts[i])
            np.testing.assert_array_equal(batch.estimates[i], single.estimate)


# ---------------------------------------------------------------------------
# Agnostic fixed point of the averaged iterate
# ---------------------------------------------------------------------------


class TestAgnosticEstimates:
    def test_memoryless_stream_centers_on_optimum(self):
        # at eps = 1/2 the chain is iid, so tail-averaged SGD is unbiased
        chain = make_agnostic_bias_chain(0.5)
        problem = make_problem(chain, AgnosticDeterministic())
        batch = run_many(problem, 2000, SgdConfig(step_size=0.1), range(300))
        mean = batch.estimates.mean()
        se = batch.estimates.std(ddof=1) / math.sqrt(300)
        assert abs(mean - (-0.2)) < 5 * se

    def test_correlated_stream_is_biased(self):
        # at eps = 1/4 the estimate concentrates away from the optimum
        chain = make_agnostic_bias_chain(0.25)
        problem = make_problem(chain, AgnosticDeterministic())
        batch = run_many(problem, 2000, SgdConfig(step_size=0.1), range(300))
        mean = batch.estimates.mean()
        se = batch.estimates.std(ddof=1) / math.sqrt(300)
        asymptote = 0.5 * (0.1 - 2.0) / (2.0 * 0.1 + 5.0)
        assert abs(mean - asymptote) < 5 * se
        assert abs(mean - (-0.2)) > 10 * se

    def test_iid_companion_matches_memoryless(self):
        # make_iid_chain of the eps=1/4 chain has the same stationary law,
        # so plain SGD on it matches the eps=1/2 construction statistically
        chain = make_iid_chain(make_agnostic_bias_chain(0.25))
        problem = make_problem(chain, AgnosticDeterministic())
        batch = run_many(problem, 2000, SgdConfig(step_size=0.1), range(300))
        mean = batch.estimates.mean()
        se = batch.estimates.std(ddof=1) / math.sqrt(300)
        assert abs(mean - (-0.2)) < 5 * se


# ---------------------------------------------------------------------------
# Contraction traces
# ---------------------------------------------------------------------------


class TestLowerBoundTrace:
    def _problem(self, d=4, eps=0.9):
        return make_problem(
            GaussianARSpec(dim=d, epsilon=eps), Noiseless(), w_star=np.zeros(d)
        )

    def test_one_step_identity(self):
        problem = self._problem()
        e1 = np.eye(4)[0]
        trace = run_lower_bound_trace(problem, 400, 0.04, 3, w_init=e1)
        assert trace.gammas[0] == 1.0
        assert trace.alphas.shape == (400,)
        assert trace.gammas.shape == (401,)
        assert trace.identity_residuals().max() <= 1e-12

    def test_gamma_contracts_monotonically(self):
        # eta ||X||^2 stays far below 2, so every step shrinks the distance
        problem = self._problem()
        trace = run_lower_bound_trace(problem, 800, 0.04, 5, w_init=np.eye(4)[0])
        assert np.all(np.diff(trace.gammas) <= 0.0)
        assert trace.gammas[-1] < trace.gammas[0]
        assert 0.001 < trace.zeta < 0.2

    def test_alpha_recorded_before_update(self):
        # alpha_1 uses the initial point, so it is reproducible by hand
        problem = self._problem()
        w1 = np.array([0.5, 0.5, -0.5, 0.5])
        trace = run_lower_bound_trace(problem, 5, 0.04, 11, w_init=w1)
        X = GaussianPathCursor(problem.chain, [run_generators(11)[0]]).take(5)[:, 0, :]
        assert trace.alphas[0] == np.vecdot(X[0], w1 - problem.w_star)
        np.testing.assert_allclose(trace.x_sq_norms, (X**2).sum(axis=1), rtol=1e-12)

    def test_regime_warnings(self):
        problem = self._problem()
        with pytest.warns(UserWarning):
            run_lower_bound_trace(problem, 50, 0.1, 0)  # eta too large
        with pytest.warns(UserWarning):
            run_lower_bound_trace(self._problem(eps=0.5), 50, 0.04, 0)  # eps^2 <= 1/2

    def test_requires_noiseless_gaussian(self):
        noisy = gaussian_problem(d=4, eps=0.9, sigma=0.1, w_star=np.zeros(4))
        with pytest.raises(ValueError):
            run_lower_bound_trace(noisy, 50, 0.04, 0)
        with pytest.raises(ValueError):
            run_lower_bound_trace(finite_problem(sigma=0.0), 50, 0.04, 0)

    def test_batch_matches_singles(self):
        problem = self._problem()
        alphas, gammas, xsq = run_lower_bound_traces(
            problem, 60, 0.04, [5, 6], w_init=np.eye(4)[0]
        )
        assert alphas.shape == (60, 2)
        assert gammas.shape == (61, 2)
        for i, seed in enumerate([5, 6]):
            solo = run_lower_bound_trace(problem, 60, 0.04, seed, w_init=np.eye(4)[0])
            np.testing.assert_array_equal(alphas[:, i], solo.alphas)
            np.testing.assert_array_equal(gammas[:, i], solo.gammas)
            np.testing.assert_array_equal(xsq[:, i], solo.x_sq_norms)
