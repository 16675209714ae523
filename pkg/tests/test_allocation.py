"""Tests for the complementary-GP build and the iterative power allocator."""

import dataclasses

import numpy as np
import pytest

from conftest import make_scenario, support_allocation
from scma_d2d.allocation import (
    AllocationSolverError,
    InfeasibleScenarioError,
    allocate,
    build_p2,
    expand_denominator,
    feasible_start,
    initial_allocation,
    meets_qos,
    objective_sum_rate,
    pack_allocation,
    random_baseline,
    sum_rate,
    unpack_allocation,
    variable_registry,
    write_trace_csv,
)
from scma_d2d.capacity import PowerAllocation
from scma_d2d.channel import ChannelRealization, ScenarioConfig
from scma_d2d.factor_graph import build_factor_graph
from scma_d2d.gp import SolverSettings
from scma_d2d.posynomial import condense, product


def constraint_values(p2, x):
    return np.array([c.evaluate(x) for c in p2.constraints])


class TestBuildP2:
    def test_counts_baseline(self):
        """6 users x 2 tones each + 1 pair: 26 constraints, 13 variables."""
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        assert p2.n_variables == 13
        assert len(p2.constraints) == 26
        assert len(p2.numerator_factors) == 5      # 4 tones + 1 pair
        assert len(p2.denominator_factors) == 5

    def test_registry_order(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        assert p2.registry[:4] == ("P_1_1", "P_1_2", "P_2_1", "P_2_3")
        assert p2.registry[-1] == "Pd_1"

    def test_no_pairs(self):
        """Without D2D the pair factors and their constraints vanish."""
        cfg, graph, ch, occ = make_scenario(seed=1, jd=1)
        cfg0 = dataclasses.replace(cfg, J_D=0)
        ch0 = ChannelRealization(
            cell_to_bs=ch.cell_to_bs,
            d2d_to_bs=np.ones(0, dtype=complex),
            d2d_pair=np.ones(0, dtype=complex),
            cell_to_d2d=np.ones((cfg.J, 0), dtype=complex),
            noise_power_w=ch.noise_power_w)
        p2 = build_p2(cfg0, ch0, graph, {})
        assert p2.n_variables == 12
        assert len(p2.constraints) == 24
        assert len(p2.denominator_factors) == 4

    def test_tone_factors(self):
        """Occupied tone noise has the D2D term; idle tones are the constant
        noise power."""
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        occupied = p2.numerator_factors[0]
        assert len(occupied) == 2
        for k in (1, 2, 3):
            idle = p2.numerator_factors[k]
            assert len(idle) == 1
            assert idle.coefficients[0] == pytest.approx(ch.noise_power_w)
            assert np.allclose(idle.exponents, 0.0)

    def test_pack_unpack_round_trip(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        alloc = support_allocation(cfg, graph, np.random.default_rng(2))
        x = pack_allocation(p2, alloc)
        again = unpack_allocation(p2, x, (cfg.J, cfg.K))
        assert np.allclose(again.cellular, alloc.cellular)
        assert np.allclose(again.d2d, alloc.d2d)


class TestExpandDenominator:
    def test_term_count_and_homomorphism(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        expanded = expand_denominator(p2)
        bound = int(np.prod([len(f) for f in p2.denominator_factors]))
        assert len(expanded) <= bound
        rng = np.random.default_rng(3)
        for _ in range(5):
            x = rng.uniform(1e-3, 1.0, size=p2.n_variables)
            factorwise = 1.0
            for f in p2.denominator_factors:
                factorwise *= f.evaluate(x)
            assert expanded.evaluate(x) == pytest.approx(factorwise, rel=1e-10)

    def test_constant_factor_scales_coefficients(self):
        """Multiplying by the constant noise factor rescales every term."""
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        idle = p2.numerator_factors[1]          # constant posynomial
        g = p2.denominator_factors[0]
        scaled = g * idle
        assert len(scaled) == len(g)
        assert np.allclose(np.sort(scaled.coefficients),
                           np.sort(g.coefficients * idle.coefficients[0]))


class TestSumRate:
    def test_zero_powers(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        alloc = PowerAllocation(np.zeros((cfg.J, cfg.K)), np.zeros(1))
        assert sum_rate(ch, graph, occ, alloc) == pytest.approx(0.0, abs=1e-12)

    def test_integer_bits_on_unit_sinr_links(self):
        """Hand-built channels with unit and 3x SINRs give integer sums."""
        graph = build_factor_graph(2, 2, 1)
        ch = ChannelRealization(
            cell_to_bs=np.array([[1.0 + 0j, 1.0], [1.0, np.sqrt(3.0)]]),
            d2d_to_bs=np.array([1.0 + 0j]),
            d2d_pair=np.array([1.0 + 0j]),
            cell_to_d2d=np.array([[1.0 + 0j], [1.0]]),
            noise_power_w=1.0,
        )
        cell = np.diag([1.0, 1.0])   # SINR 1 on tone 1, 3 on tone 2
        alloc = PowerAllocation(cell, np.zeros(1))
        assert sum_rate(ch, graph, {0: 0}, alloc) == pytest.approx(3.0, rel=1e-12)
        d2d_only = PowerAllocation(np.zeros((2, 2)), np.array([1.0]))
        assert sum_rate(ch, graph, {0: 0}, d2d_only) == pytest.approx(1.0, rel=1e-12)

    def test_posynomial_ratio_identity(self):
        """Capacity-sum route equals log2 of the factored posynomial ratio."""
        for seed in range(5):
            cfg, graph, ch, occ = make_scenario(seed=seed, jd=2)
            p2 = build_p2(cfg, ch, graph, occ)
            alloc = support_allocation(cfg, graph, np.random.default_rng(seed))
            direct = sum_rate(ch, graph, occ, alloc)
            packed = pack_allocation(p2, alloc)
            assert direct == pytest.approx(objective_sum_rate(p2, packed), rel=1e-10)


class TestAllocate:
    def test_trace_monotone_and_converged(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        trace = allocate(cfg, ch, graph, occ)
        rates = trace.rates()
        for a, b in zip(rates, rates[1:]):
            assert b >= a - 1e-8
        assert trace.converged
        assert trace.iterations_used <= 5
        assert all(p.solver_status == "optimal" for p in trace.points)

    def test_support_respected_throughout(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        trace = allocate(cfg, ch, graph, occ)
        off = graph.indicator.T == 0
        assert np.all(trace.initial_powers.cellular[off] == 0)
        for p in trace.points:
            assert np.all(p.powers.cellular[off] == 0)

    def test_constraints_hold_at_every_iterate(self):
        cfg, graph, ch, occ = make_scenario(seed=1, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        trace = allocate(cfg, ch, graph, occ)
        for p in trace.points:
            vals = constraint_values(p2, pack_allocation(p2, p.powers))
            assert np.all(vals <= 1.0 + 1e-8)

    def test_some_variable_reaches_its_cap(self):
        """The optimizer saturates transmit caps for favored users."""
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        trace = allocate(cfg, ch, graph, occ)
        final = trace.final.powers
        rel = np.concatenate([
            final.cellular[graph.indicator.T == 1] / (cfg.cellular_power_cap_w / graph.d_f),
            final.d2d / cfg.d2d_power_cap_w,
        ])
        assert rel.max() >= 1 - 1e-6

    def test_fixed_point_consistency(self):
        """Re-condensing and re-solving at the converged point barely moves it."""
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        trace = allocate(cfg, ch, graph, occ)
        assert trace.converged
        x_star = pack_allocation(build_p2(cfg, ch, graph, occ), trace.final.powers)
        resumed = allocate(cfg, ch, graph, occ, t_max=trace.iterations_used + 1)
        x_again = pack_allocation(build_p2(cfg, ch, graph, occ), resumed.final.powers)
        assert np.all(np.abs(x_again - x_star) <= 1e-5 * np.abs(x_star))

    def test_single_pass(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        trace = allocate(cfg, ch, graph, occ, t_max=1)
        assert trace.iterations_used == 1

    def test_infeasible_draw_reported(self):
        """A deep-faded link that cannot reach its floor raises, with the
        achieved slack attached."""
        cfg, graph, ch, occ = make_scenario(seed=2, jd=1)
        with pytest.raises(InfeasibleScenarioError) as err:
            allocate(cfg, ch, graph, occ)
        assert err.value.max_slack > 0

    def test_trace_csv(self, tmp_path):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        trace = allocate(cfg, ch, graph, occ, t_max=2)
        out = tmp_path / "trace.csv"
        write_trace_csv(trace, p2.registry, out)
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + 1 + 2    # header, start point, two passes
        header = lines[0].split(",")
        assert header[0] == "iteration"
        assert header[1] == "P_1_1_w"
        assert header[-1] == "sum_rate_bits"
        assert float(lines[1].split(",")[-1]) == pytest.approx(trace.initial_sum_rate_bits)


class TestFeasibleStart:
    def test_half_cap_point_used_when_feasible(self):
        cfg, graph, ch, occ = make_scenario(seed=1, jd=1)
        p2 = build_p2(cfg, ch, graph, occ)
        x = feasible_start(cfg, graph, p2, SolverSettings())
        expected = pack_allocation(p2, initial_allocation(cfg, graph))
        assert np.allclose(x, expected)

    def test_phase1_rescues_violated_start(self):
        """A D2D floor just above the half-cap start's SINR (but inside the
        3 dB cap headroom) forces the phase-1 path."""
        from scma_d2d.capacity import d2d_sinr
        cfg, graph, ch, occ = make_scenario(seed=1, jd=1)
        start_sinr_db = 10 * np.log10(
            d2d_sinr(ch, initial_allocation(cfg, graph), 0, occ))
        cfg = dataclasses.replace(cfg, d2d_sinr_floor_db=start_sinr_db + 1.5)
        p2 = build_p2(cfg, ch, graph, occ)
        x0 = pack_allocation(p2, initial_allocation(cfg, graph))
        assert constraint_values(p2, x0).max() > 1.0
        x = feasible_start(cfg, graph, p2, SolverSettings())
        assert constraint_values(p2, x).max() < 1.0


class TestRandomBaseline:
    def test_deterministic(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        a = random_baseline(cfg, ch, graph, occ, np.random.default_rng(5))
        b = random_baseline(cfg, ch, graph, occ, np.random.default_rng(5))
        assert np.array_equal(a.allocation.cellular, b.allocation.cellular)
        assert np.array_equal(a.allocation.d2d, b.allocation.d2d)
        assert a.draws_used == b.draws_used

    def test_respects_caps_and_support(self):
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        draw = random_baseline(cfg, ch, graph, occ, np.random.default_rng(6))
        assert draw.feasible
        assert meets_qos(cfg, ch, graph, occ, draw.allocation)
        assert np.all(draw.allocation.cellular <= cfg.cellular_power_cap_w / graph.d_f)
        assert np.all(draw.allocation.d2d <= cfg.d2d_power_cap_w)
        assert np.all(draw.allocation.cellular[graph.indicator.T == 0] == 0)

    def test_degenerate_zero_caps(self):
        """Caps at zero watts leave only the all-zero draw, flagged infeasible."""
        cfg, graph, ch, occ = make_scenario(seed=0, jd=1)
        dead = dataclasses.replace(cfg, cellular_power_cap_dbm=-np.inf,
                                   d2d_power_cap_dbm=-np.inf)
        draw = random_baseline(dead, ch, graph, occ, np.random.default_rng(7),
                               max_resample=10)
        assert not draw.feasible
        assert np.all(draw.allocation.cellular == 0)
        assert np.all(draw.allocation.d2d == 0)

    def test_proposed_beats_baseline_on_average(self):
        """Quick 5-seed version of the sweep-scale comparison."""
        gaps = []
        for seed in (0, 1, 3, 4, 5):    # seed 2 is an infeasible draw
            cfg, graph, ch, occ = make_scenario(seed=seed, jd=1)
            trace = allocate(cfg, ch, graph, occ)
            draw = random_baseline(cfg, ch, graph, occ, np.random.default_rng(seed))
            assert draw.feasible
            gaps.append(trace.final.sum_rate_bits
                        - sum_rate(ch, graph, occ, draw.allocation))
        assert np.mean(gaps) > 0


class TestMiniatureOracle:
    def test_matches_grid_search(self):
        """3-variable instance against an exhaustive 40^3 log-space scan."""
        cfg, graph, ch, occ = make_scenario(
            seed=7, jd=1, J=2, K=2, N=1,
            cellular_sinr_floor_db=10.0, d2d_sinr_floor_db=10.0)
        trace = allocate(cfg, ch, graph, occ)
        got = trace.final.sum_rate_bits

        n0 = ch.noise_power_w
        h00 = abs(ch.cell_to_bs[0, 0]) ** 2
        h11 = abs(ch.cell_to_bs[1, 1]) ** 2
        hdb = abs(ch.d2d_to_bs[0]) ** 2
        hdd = abs(ch.d2d_pair[0]) ** 2
        hcd0 = abs(ch.cell_to_d2d[0, 0]) ** 2
        fc, fd = cfg.cellular_sinr_floor, cfg.d2d_sinr_floor
        cap_c = cfg.cellular_power_cap_w / graph.d_f
        cap_d = cfg.d2d_power_cap_w
        axes = [np.logspace(np.log10(lo), np.log10(hi), 40) for lo, hi in
                ((fc * n0 / h00, cap_c), (fc * n0 / h11, cap_c),
                 (fd * n0 / hdd, cap_d))]
        p1, p2_, pd = np.meshgrid(*axes, indexing="ij")
        s0 = h00 * p1 / (n0 + hdb * pd)
        s1 = h11 * p2_ / n0
        sd = hdd * pd / (n0 + hcd0 * p1)
        rate = np.log2(1 + s0) + np.log2(1 + s1) + np.log2(1 + sd)
        rate[~((s0 >= fc) & (s1 >= fc) & (sd >= fd))] = -np.inf
        assert got == pytest.approx(rate.max(), rel=1e-2)
