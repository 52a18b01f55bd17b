import math
import unittest

from islnoma import constants
from islnoma.exceptions import ConfigException, InfeasibleScenarioException, SatIndexException
from islnoma.orbit import SatIndex
from islnoma.scenario import Scenario, load_scenario
from islnoma.test import TempDirTestCase
from islnoma.test.case import available_scenarios, load_test_scenario, scenario_document, scenario_from

__author__ = 'islnoma'


class ScenarioParseTest(unittest.TestCase):

    def test_fixtures_load(self):
        assert available_scenarios() == ['full', 'mid', 'tiny']
        for name in available_scenarios():
            load_test_scenario(name)

    def test_tiny(self):
        s = load_test_scenario('tiny')
        assert s.walker.K == 4 and s.walker.N == 2
        assert s.sink == SatIndex(1, 1)
        assert s.budget.P_tx == 10.0
        self.assertAlmostEqual(s.budget.P_sens, 1e-15, delta=1e-27)
        assert s.S == 8
        assert s.epoch == 0.0
        assert s.seed == 0
        assert s.noise_convention == constants.NOISE_SYMBOL_RATE
        assert s.search.mode == constants.SEARCH_EXHAUSTIVE
        assert s.horizon_s == s.walker.T_rev
        assert s.dt_s == 1.0

    def test_full(self):
        s = load_test_scenario('full')
        assert s.epoch == 'auto-L=19'
        assert s.sink == SatIndex(15, 47)
        assert s.search.mode == constants.SEARCH_RANDOM_SAMPLE
        assert s.search.count == 100000
        self.assertAlmostEqual(math.degrees(s.budget.beta), 11.478, places=3)

    def test_unknown_keys(self):
        with self.assertRaises(ConfigException):
            scenario_from('tiny', colour='blue')
        walker = dict(scenario_document('tiny')['walker'], eccentricity=0.1)
        with self.assertRaises(ConfigException):
            scenario_from('tiny', walker=walker)

    def test_missing_keys(self):
        document = scenario_document('tiny')
        del document['S']
        with self.assertRaises(ConfigException):
            Scenario.from_dict(document)

    def test_bad_values(self):
        for changes in ({'S': 1}, {'S': True}, {'noise_convention': 'bandwidth'}, {'pulse': {'shape': 'sinc'}},
                        {'epoch': 'later'}, {'epoch': -1}, {'seed': 1.5}, {'search': {'mode': 'greedy'}},
                        {'symbol_rate': 0}, {'pulse': {'shape': 'triangular', 'eps_fraction': 1.0}}):
            with self.assertRaises(ConfigException):
                scenario_from('tiny', **changes)

    def test_sink_outside(self):
        with self.assertRaises(SatIndexException):
            scenario_from('tiny', sink=[3, 1])
        assert scenario_from('tiny', sink="2:1").sink == SatIndex(2, 1)

    def test_explicit_beamwidth(self):
        budget = dict(scenario_document('tiny')['budget'], half_beamwidth_deg=5.0)
        s = scenario_from('tiny', budget=budget)
        self.assertAlmostEqual(s.budget.beta, math.radians(5.0), places=15)

    def test_beam_ends(self):
        assert load_test_scenario('tiny').budget.beam_ends == constants.BEAM_AT_BOTH
        budget = dict(scenario_document('tiny')['budget'], beam_ends='sink')
        assert scenario_from('tiny', budget=budget).budget.beam_ends == constants.BEAM_AT_SINK
        budget['beam_ends'] = 'transmitter'
        with self.assertRaises(ConfigException):
            scenario_from('tiny', budget=budget)


class ScenarioDigestTest(unittest.TestCase):

    def test_stable(self):
        assert load_test_scenario('mid').digest() == load_test_scenario('mid').digest()
        document = scenario_document('mid')
        reordered = dict(reversed(list(document.items())))
        assert Scenario.from_dict(reordered).digest() == load_test_scenario('mid').digest()

    def test_override(self):
        s = load_test_scenario('mid')
        changed = s.override(S=8, noise_figure_db=4)
        assert changed.S == 8 and changed.noise_figure_db == 4
        assert changed.digest() != s.digest()
        assert s.override(S=None).digest() == s.digest()
        assert s.S == 4


class ScenarioPhysicsTest(unittest.TestCase):

    def test_sigma2_conventions(self):
        rate = load_test_scenario('tiny')
        density = load_test_scenario('tiny', noise_convention=constants.NOISE_DENSITY)
        self.assertAlmostEqual(rate.sigma2() / density.sigma2(), 4e6, delta=4e6 * 1e-12)
        assert abs(rate.sigma2() - 1.0105e-13) / 1.0105e-13 < 1e-3

    def test_pulse(self):
        pm = load_test_scenario('tiny').pulse()
        assert pm.S == 8
        self.assertAlmostEqual(pm.T, 2.5e-7, delta=1e-20)
        self.assertAlmostEqual(pm.eps, 0.5 * pm.T_c, delta=1e-22)

    def test_links(self):
        s = load_test_scenario('mid')
        links = s.links(0.0)
        sats = [l.sat for l in links]
        assert sats == sorted(sats)
        assert [l.index for l in links] == list(range(1, len(links) + 1))
        for n in (2, 3, 35, 36):
            assert SatIndex(1, n) in sats
        again = s.links(0.0)
        assert [l.A for l in again] == [l.A for l in links]

    def test_no_links(self):
        with self.assertRaises(InfeasibleScenarioException):
            load_test_scenario('tiny').links(0.0)

    def test_fixed_epoch(self):
        assert load_test_scenario('mid').resolve_epoch() == 0.0


class LoadScenarioTest(TempDirTestCase):

    def test_missing_file(self):
        with self.assertRaises(ConfigException):
            load_scenario(self.path('nope.json'))

    def test_bad_json(self):
        with open(self.path('bad.json'), 'w') as fd:
            fd.write('{"walker": ')
        with self.assertRaises(ConfigException):
            load_scenario(self.path('bad.json'))


if __name__ == '__main__':
    unittest.main()
