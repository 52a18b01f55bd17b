import math
import unittest
from dataclasses import replace

import numpy as np

from islnoma import constants
from islnoma.capacity import DofAllocation, allocate, fairness, group_rate, hybrid_opt_dof, individual_rates, \
    jensen_bounds_check, log_det_rate, noma_capacity, oma_capacity, oma_opt_dof, sum_capacity, trace_dof, \
    two_sat_oracle
from islnoma.channel import LinkParams, PulseModel, build_pulse, group_channel, link_energies
from islnoma.exceptions import AllocationException, DomainException, ShapeException, UndefinedFairnessException
from islnoma.receiver import sinr_per_stream
from islnoma.test import random_group, random_links, relative_error

__author__ = 'islnoma'


def _random_grouping(rng, pm, links, G):
    """
    Split links into G non-empty groups and draw a random DoF allocation.
    """
    order = rng.permutation(len(links))
    cuts = np.sort(rng.choice(np.arange(1, len(links)), size=G - 1, replace=False)) if G > 1 else []
    rhos = rng.dirichlet(np.ones(G))
    return [group_channel(pm, [links[i] for i in part], rho) for part, rho in zip(np.split(order, cuts), rhos)]


class DofAllocationTest(unittest.TestCase):

    def test_uniform(self):
        dof = DofAllocation.uniform(4)
        assert len(dof) == 4
        assert list(dof) == [0.25] * 4
        assert dof.mode == constants.DOF_UNIFORM

    def test_validation(self):
        with self.assertRaises(AllocationException):
            DofAllocation((0.5, 0.6))
        with self.assertRaises(AllocationException):
            DofAllocation((1.0, 0.0))
        with self.assertRaises(AllocationException):
            DofAllocation(())
        with self.assertRaises(DomainException):
            DofAllocation.proportional([1.0, -1.0], constants.DOF_OPTIMIZED)

    def test_oma_opt(self):
        dof = oma_opt_dof([1.0, 3.0])
        assert np.allclose(dof.rhos, [0.25, 0.75], atol=1e-15)
        assert dof.mode == constants.DOF_OPTIMIZED
        with self.assertRaises(DomainException):
            oma_opt_dof([1.0, 0.0])

    def test_hybrid_opt(self):
        pm = PulseModel.ideal(4)
        g1 = group_channel(pm, [LinkParams(A=complex(math.sqrt(3.0)), f=0.0, nu=0.1, index=1)])
        g2 = group_channel(pm, [LinkParams(A=1.0 + 0j, f=0.0, nu=0.3, index=2)])
        assert np.allclose(hybrid_opt_dof([g1, g2]).rhos, [0.75, 0.25], atol=1e-12)

    def test_allocate(self):
        rng = np.random.default_rng(3)
        pm = build_pulse(4, 1.0)
        groups = [random_group(rng, pm, 2), random_group(rng, pm, 3)]
        for mode in (constants.DOF_UNIFORM, constants.DOF_OPTIMIZED, constants.DOF_TRACE):
            allocated, dof = allocate(groups, mode)
            assert dof.mode == mode
            assert [gc.rho for gc in allocated] == list(dof.rhos)
        assert np.allclose(trace_dof(groups).rhos, allocate(groups, constants.DOF_TRACE)[1].rhos)
        with self.assertRaises(DomainException):
            allocate(groups, 'greedy')


class GroupRateTest(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(42)
        self.pm = build_pulse(8, 2.5e-7)

    def test_single_link(self):
        pm = PulseModel.ideal(8)
        link = random_links(self.rng, 1)[0]
        gc = group_channel(pm, [link], 0.4)
        expected = 0.4 * math.log2(1.0 + 8 * abs(link.A) ** 2 / (0.1 * 0.4))
        assert relative_error(group_rate(gc, 0.1), expected) < 1e-12

    def test_three_forms_agree(self):
        for L in (1, 4, 8, 11):
            gc = random_group(self.rng, self.pm, L, rho=0.3)
            svd = group_rate(gc, 0.05)
            assert relative_error(log_det_rate(gc, 0.05), svd) < 1e-10
            report = individual_rates([gc.with_rho(1.0)], 0.05)
            assert relative_error(report.C_sum, group_rate(gc.with_rho(1.0), 0.05)) < 1e-9

    def test_phase_invariance(self):
        links = random_links(self.rng, 5)
        rotated = [replace(l, A=l.A * np.exp(1j * phi)) for l, phi in zip(links, self.rng.uniform(0, 6.28, 5))]
        r1 = group_rate(group_channel(self.pm, links, 0.5), 0.2)
        r2 = group_rate(group_channel(self.pm, rotated, 0.5), 0.2)
        assert relative_error(r1, r2) < 1e-12

    def test_bad_noise(self):
        gc = random_group(self.rng, self.pm, 2)
        with self.assertRaises(DomainException):
            group_rate(gc, 0.0)

    def test_budget(self):
        groups = [random_group(self.rng, self.pm, 2, rho=0.5), random_group(self.rng, self.pm, 2, rho=0.6)]
        with self.assertRaises(AllocationException):
            sum_capacity(groups, 0.1)
        with self.assertRaises(AllocationException):
            individual_rates(groups, 0.1)


class NomaOmaTest(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(17)
        self.pm = build_pulse(8, 2.5e-7)

    def test_equal_doppler(self):
        links = random_links(self.rng, 5, nus=[0.3] * 5)
        amps = np.array([abs(l.A) ** 2 for l in links])
        energy = link_energies(self.pm, [0.3])[0]
        noma = noma_capacity(links, self.pm, 0.1)
        oma = oma_capacity(amps, oma_opt_dof(amps), energy, 0.1)
        assert abs(noma - oma) < 1e-9
        assert abs(noma - math.log2(1.0 + energy * amps.sum() / 0.1)) < 1e-9

    def test_singletons_match_oma(self):
        links = random_links(self.rng, 6)
        amps = np.array([abs(l.A) ** 2 for l in links])
        energies = link_energies(self.pm, [l.nu for l in links])
        dof = DofAllocation.proportional(self.rng.uniform(0.5, 1.5, 6), constants.DOF_OPTIMIZED)
        groups = [group_channel(self.pm, [l], rho) for l, rho in zip(links, dof)]
        assert abs(sum_capacity(groups, 0.3) - oma_capacity(amps, dof, energies, 0.3)) < 1e-9

    def test_oma_ignores_doppler_for_white_pulse(self):
        pm = PulseModel.ideal(8)
        amps = [0.5, 1.0, 2.0]
        dof = DofAllocation.uniform(3)
        for nus in ([0.0, 0.1, 0.2], [0.9, 0.9, 0.45]):
            links = random_links(self.rng, 3, nus=nus)
            links = [replace(l, A=complex(math.sqrt(a))) for l, a in zip(links, amps)]
            groups = [group_channel(pm, [l], rho) for l, rho in zip(links, dof)]
            assert abs(sum_capacity(groups, 0.2) - oma_capacity(amps, dof, 8.0, 0.2)) < 1e-9

    def test_oma_shape(self):
        with self.assertRaises(ShapeException):
            oma_capacity([1.0, 2.0], DofAllocation.uniform(3), 8.0, 0.1)

    def test_noma_above_partitions(self):
        links = random_links(self.rng, 7)
        noma = noma_capacity(links, self.pm, 0.05)
        for G in (1, 2, 3, 7):
            groups = _random_grouping(self.rng, self.pm, links, G)
            assert sum_capacity(groups, 0.05) <= noma + 1e-9


class FairnessTest(unittest.TestCase):

    def test_values(self):
        assert fairness([1.0, 1.0, 1.0, 1.0]) == 1.0
        assert fairness([2.0, 0.0, 0.0, 0.0]) == 0.25
        self.assertAlmostEqual(fairness([1.0, 3.0]), 16.0 / 20.0, places=15)
        assert fairness([5.0]) == 1.0

    def test_undefined(self):
        with self.assertRaises(UndefinedFairnessException):
            fairness([])
        with self.assertRaises(UndefinedFairnessException):
            fairness([0.0, 0.0])
        with self.assertRaises(DomainException):
            fairness([1.0, -0.5])


class IndividualRatesTest(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(23)
        self.pm = build_pulse(4, 1.0)
        self.links = random_links(self.rng, 6)
        self.groups, self.dof = allocate([group_channel(self.pm, self.links[:2]),
                                          group_channel(self.pm, self.links[2:])], constants.DOF_OPTIMIZED)

    def test_report(self):
        report = individual_rates(self.groups, 0.1, self.dof)
        assert sorted(report.per_satellite_rates) == [1, 2, 3, 4, 5, 6]
        assert report.group_of[1] == 0 and report.group_of[6] == 1
        assert sorted(report.stage_of[i] for i in (3, 4, 5, 6)) == [0, 1, 2, 3]
        assert abs(report.C_sum - sum_capacity(self.groups, 0.1)) < 1e-9
        assert np.allclose(report.group_rates, [group_rate(gc, 0.1) for gc in self.groups], rtol=1e-9)
        assert 0 < report.fairness <= 1.0
        assert report.rates() == [report.per_satellite_rates[i] for i in range(1, 7)]

    def test_serialization(self):
        report = individual_rates(self.groups, 0.1, self.dof)
        data = report.to_json()
        assert [r['index'] for r in data['rates']] == [1, 2, 3, 4, 5, 6]
        assert data['dof_mode'] == constants.DOF_OPTIMIZED
        rows = report.csv_rows()
        assert len(rows) == 8
        assert rows[-2][0] == 'C_sum' and rows[-1][0] == 'fairness'


class TwoSatelliteTest(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(31)
        self.pm = build_pulse(8, 1.0)

    def test_matches_general_sinr(self):
        for _ in range(1000):
            links = random_links(self.rng, 2, power=(0.1, 10.0))
            sigma2 = float(self.rng.uniform(0.01, 1.0))
            sinr1, sinr2, sinr1_min = two_sat_oracle(links[0].A, links[1].A, links[0].nu, links[1].nu, self.pm,
                                                     sigma2)
            H = group_channel(self.pm, links).H
            assert relative_error(sinr1, sinr_per_stream(H, sigma2)[0]) < 1e-9
            assert relative_error(sinr2, sinr_per_stream(H[:, [1]], sigma2)[0]) < 1e-9
            assert sinr1 >= sinr1_min * (1 - 1e-12)

    def test_equal_doppler_reaches_minimum(self):
        sinr1, _, sinr1_min = two_sat_oracle(1.0, 0.5j, 0.2, 0.2, self.pm, 0.1)
        assert relative_error(sinr1, sinr1_min) < 1e-9
        sinr1, _, sinr1_min = two_sat_oracle(1.0, 0.5j, 0.2, 0.3, self.pm, 0.1)
        assert sinr1 > sinr1_min


class BoundsTest(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(101)

    def test_random_groupings(self):
        for _ in range(120):
            pm = build_pulse(int(self.rng.choice([2, 4, 8])), 1.0)
            L = int(self.rng.integers(2, 11))
            G = int(self.rng.integers(1, L + 1))
            links = random_links(self.rng, L, power=(0.1, 10.0))
            groups = _random_grouping(self.rng, pm, links, G)
            report = jensen_bounds_check(groups, float(self.rng.uniform(0.01, 1.0)))
            assert report.holds(), report.slacks
            assert report.c_hybrid <= report.c_noma + 1e-9

    def test_trace_dof_above_oma(self):
        for _ in range(50):
            pm = build_pulse(4, 1.0)
            links = random_links(self.rng, 6)
            groups, _ = allocate(_random_grouping(self.rng, pm, links, 3), constants.DOF_TRACE)
            report = jensen_bounds_check(groups, 0.1)
            assert report.c_hybrid >= report.c_oma_opt - 1e-9

    def test_proportional_groups_reach_noma(self):
        pm = build_pulse(8, 1.0)
        base = random_links(self.rng, 3, nus=[0.1, 0.4, 0.7])
        scales = [1.0, 2.0, 0.5]
        links = [replace(l, A=l.A * c, index=3 * k + i + 1) for k, c in enumerate(scales)
                 for i, l in enumerate(base)]
        groups = [group_channel(pm, links[3 * k:3 * k + 3]) for k in range(3)]
        groups, _ = allocate(groups, constants.DOF_TRACE)
        report = jensen_bounds_check(groups, 0.2)
        assert abs(report.c_hybrid - report.c_noma) < 1e-9
        assert abs(report.c_hybrid - noma_capacity(links, pm, 0.2)) < 1e-9

    def test_amgm_tight_for_orthogonal_groups(self):
        S = 8
        pm = PulseModel.ideal(S)
        links = random_links(self.rng, 6, power=(1.0, 1.0), nus=[0.0, 0.25, 0.5, 0.125, 0.375, 0.625])
        groups, _ = allocate([group_channel(pm, links[:3]), group_channel(pm, links[3:])], constants.DOF_UNIFORM)
        report = jensen_bounds_check(groups, 0.3)
        assert abs(report.amgm_bound - report.c_hybrid) < 1e-9


if __name__ == '__main__':
    unittest.main()
