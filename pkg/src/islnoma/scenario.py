"""
Scenario files: one JSON document describing a study.

Angles are given in degrees, gains in dBi and powers either as numbers (W) or
as strings with a unit suffix ("10 W", "-120 dBm"). Unknown keys are rejected
at every level. The scenario hash written into every output table is the
SHA-256 of the canonical JSON of the effective document, that is after any
command line override.
"""

__author__ = 'islnoma'

import copy
import json
import logging
import math
import re
from dataclasses import dataclass

from islnoma import constants
from islnoma.channel import build_links, build_pulse, noise_variance
from islnoma.exceptions import ConfigException, InfeasibleScenarioException, ISLException
from islnoma.feasibility import LinkBudget, feasible_set, find_epoch
from islnoma.orbit import SatIndex, WalkerConfig
from islnoma.partition import SearchConfig
from islnoma.utils import canonical_json, db_to_linear, digest, parse_power

log = logging.getLogger('islnoma.scenario')

_AUTO_EPOCH = re.compile(r'^auto-L=(\d+)$')

# section -> (required keys, optional keys)
_SECTIONS = {
    None: (('walker', 'budget', 'sink', 'symbol_rate', 'S', 'noise_figure_db'),
           ('noise_temperature_k', 'noise_convention', 'pulse', 'observation_s', 'epoch', 'seed', 'timeline',
            'search', 'name')),
    'walker': (('K', 'P', 'altitude_km', 'inclination_deg', 'phasing'), ('earth_radius_km', 'period_s')),
    'budget': (('carrier_hz', 'tx_power', 'tx_gain_dbi', 'rx_gain_dbi', 'sensitivity'),
               ('half_beamwidth_deg', 'beam_ends')),
    'pulse': (('shape',), ('rolloff', 'eps_fraction')),
    'timeline': ((), ('horizon_s', 'dt_s')),
    'search': (('mode',), ('count', 'seed', 'group_size_cap', 'compare_swap')),
}


def _check_keys(section, data):
    required, optional = _SECTIONS[section]
    where = "scenario" if section is None else "scenario section '%s'" % section
    if not isinstance(data, dict):
        raise ConfigException("%s must be an object" % where)
    unknown = sorted(set(data) - set(required) - set(optional))
    if unknown:
        raise ConfigException("unknown key(s) %s in %s" % (", ".join(unknown), where))
    missing = [k for k in required if k not in data]
    if missing:
        raise ConfigException("missing key(s) %s in %s" % (", ".join(missing), where))
    return data


def _number(data, key, default=None, positive=False):
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigException("'%s' must be a number (got %r)" % (key, value))
    if positive and not value > 0:
        raise ConfigException("'%s' must be positive (got %r)" % (key, value))
    return value


def _parse_epoch(value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if value < 0:
            raise ConfigException("epoch must not be negative (got %r)" % value)
        return float(value)
    m = _AUTO_EPOCH.match(str(value))
    if m is None:
        raise ConfigException("epoch must be seconds or 'auto-L=<n>' (got %r)" % value)
    return "auto-L=%d" % int(m.group(1))


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    A parsed scenario. The original document is kept in :attr:`document` for hashing and overrides.
    """
    document: dict
    walker: WalkerConfig
    budget: LinkBudget
    sink: SatIndex
    symbol_rate: float
    S: int
    noise_figure_db: float
    noise_temperature_k: float
    noise_convention: str
    pulse_shape: str
    rolloff: float
    eps_fraction: float
    observation_s: float
    epoch: object
    seed: int
    horizon_s: float
    dt_s: float
    search: SearchConfig

    @classmethod
    def from_dict(cls, document):
        document = copy.deepcopy(document)
        top = _check_keys(None, document)
        w = _check_keys('walker', top['walker'])
        walker = WalkerConfig.from_degrees(w['K'], w['P'], _number(w, 'altitude_km', positive=True),
                                           _number(w, 'inclination_deg'), w['phasing'],
                                           R_earth=_number(w, 'earth_radius_km', constants.EARTH_RADIUS_KM, True),
                                           T_rev=_number(w, 'period_s', constants.REVOLUTION_PERIOD_S, True))

        b = _check_keys('budget', top['budget'])
        f_c = _number(b, 'carrier_hz', positive=True)
        P_tx, P_sens = parse_power(b['tx_power']), parse_power(b['sensitivity'])
        G_tx = db_to_linear(_number(b, 'tx_gain_dbi'))
        G_rx = db_to_linear(_number(b, 'rx_gain_dbi'))
        beam_ends = b.get('beam_ends', constants.BEAM_AT_BOTH)
        if 'half_beamwidth_deg' in b:
            budget = LinkBudget(f_c, P_tx, G_tx, G_rx, math.radians(_number(b, 'half_beamwidth_deg')), P_sens,
                                beam_ends)
        else:
            budget = LinkBudget.from_gain(f_c, P_tx, G_tx, G_rx, P_sens, beam_ends)

        sink = top['sink']
        if not isinstance(sink, (list, tuple)) or len(sink) != 2:
            sink = SatIndex.parse(sink)
        else:
            sink = SatIndex(int(sink[0]), int(sink[1]))
        sink.check(walker)

        S = top['S']
        if isinstance(S, bool) or not isinstance(S, int) or S < 2:
            raise ConfigException("'S' must be an integer above 1 (got %r)" % S)
        convention = top.get('noise_convention', constants.NOISE_SYMBOL_RATE)
        if convention not in constants.NOISE_CONVENTIONS:
            raise ConfigException("unknown noise convention '%s'" % convention)

        pulse = _check_keys('pulse', top.get('pulse', {'shape': constants.PULSE_TRIANGULAR}))
        if pulse['shape'] not in constants.PULSE_SHAPES:
            raise ConfigException("unknown pulse shape '%s'" % pulse['shape'])
        eps_fraction = _number(pulse, 'eps_fraction', 0.5)
        if not 0.0 <= eps_fraction < 1.0:
            raise ConfigException("'eps_fraction' %r outside [0, 1)" % eps_fraction)

        timeline = _check_keys('timeline', top.get('timeline', {}))
        horizon = _number(timeline, 'horizon_s', walker.T_rev, True)
        dt = timeline.get('dt_s')
        if dt is not None:
            dt = _number(timeline, 'dt_s', positive=True)

        search = _check_keys('search', top.get('search', {'mode': constants.SEARCH_RANDOM_SAMPLE}))
        try:
            search = SearchConfig(mode=search['mode'], count=search.get('count'), seed=search.get('seed'),
                                  group_size_cap=search.get('group_size_cap'),
                                  compare_swap=bool(search.get('compare_swap', True)))
        except ISLException as ex:
            raise ConfigException("bad search section: %s" % ex)

        seed = top.get('seed', 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigException("'seed' must be an integer (got %r)" % seed)

        return cls(document=document, walker=walker, budget=budget, sink=sink,
                   symbol_rate=_number(top, 'symbol_rate', positive=True), S=S,
                   noise_figure_db=_number(top, 'noise_figure_db'),
                   noise_temperature_k=_number(top, 'noise_temperature_k',
                                               constants.NOISE_REFERENCE_TEMPERATURE_K, True),
                   noise_convention=convention, pulse_shape=pulse['shape'],
                   rolloff=_number(pulse, 'rolloff', 0.25, True), eps_fraction=eps_fraction,
                   observation_s=_number(top, 'observation_s', 0.0), epoch=_parse_epoch(top.get('epoch', 0.0)),
                   seed=seed, horizon_s=horizon, dt_s=dt, search=search)

    def override(self, **changes):
        """
        A new scenario with top-level keys of the document replaced; None values are ignored.
        """
        document = copy.deepcopy(self.document)
        for key, value in changes.items():
            if value is not None:
                document[key] = value
        return Scenario.from_dict(document)

    def digest(self):
        return digest(canonical_json(self.document))

    @property
    def T_sym(self):
        return 1.0 / self.symbol_rate

    def pulse(self):
        T_c = self.T_sym / self.S
        return build_pulse(self.S, self.T_sym, self.pulse_shape, eps=self.eps_fraction * T_c, rolloff=self.rolloff)

    def sigma2(self):
        bandwidth = 1.0 if self.noise_convention == constants.NOISE_DENSITY else None
        return noise_variance(self.noise_figure_db, self.T_sym, self.noise_temperature_k, bandwidth=bandwidth)

    def resolve_epoch(self, timeline=None):
        """
        Study epoch in seconds; 'auto-L=<n>' picks the midpoint of the first window with n links.
        """
        if not isinstance(self.epoch, str):
            return self.epoch
        target = int(_AUTO_EPOCH.match(self.epoch).group(1))
        t = find_epoch(self.walker, self.budget, self.sink, target, horizon=self.horizon_s, dt=self.dt_s,
                       timeline=timeline)
        if timeline is not None and self.observation_s > 0:
            window = next(w for w in timeline if w.t_start <= t < w.t_end)
            if window.duration < self.observation_s:
                log.warning("window of L=%d lasts %.3f s, shorter than the %.3f s observation", target,
                            window.duration, self.observation_s)
        log.info("epoch %s resolved to t=%.6f s", self.epoch, t)
        return t

    def links(self, t, pm=None):
        """
        Feasible links toward the sink at epoch t, numbered from 1 by (plane, slot).

        :raises InfeasibleScenarioException: when no satellite is feasible
        """
        if pm is None:
            pm = self.pulse()
        members = feasible_set(self.walker, self.budget, self.sink, t)
        if not members:
            raise InfeasibleScenarioException("no feasible link toward %s at t=%.6f s" % (self.sink, t))
        return build_links(self.walker, self.budget, self.sink, members, t, pm, seed=self.seed)


def load_scenario(path):
    """
    Read and validate a scenario file.

    :raises ConfigException: for unreadable files, bad JSON or invalid values
    """
    try:
        with open(path) as fd:
            document = json.load(fd)
    except (IOError, OSError) as ex:
        raise ConfigException("cannot read scenario %s: %s" % (path, ex))
    except ValueError as ex:
        raise ConfigException("scenario %s is not valid JSON: %s" % (path, ex))
    scenario = Scenario.from_dict(document)
    log.info("loaded scenario %s (%s)", path, scenario.digest()[:12])
    return scenario
