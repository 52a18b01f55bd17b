"""
Feasibility of intersatellite links toward a sink satellite.

A link is feasible when the transmitter is within the radio horizon (c1), the
Friis received power reaches the sink sensitivity (c2) and the link direction
falls inside one of the four conical beams, two along the roll axis and two
along the pitch axis (c3). Both terminals point their beams along their own
axes, so c3 is checked at the transmitter and at the sink unless the budget
restricts it to the sink.

Timelines are scanned on a regular grid in blocks of epochs. Within a block
only satellites that can come within range of the sink are evaluated, and
every membership change is refined by bisection.
"""

__author__ = 'islnoma'

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from islnoma import config, constants
from islnoma.exceptions import ConfigException, DomainException, DegeneratePairException, \
    InfeasibleScenarioException
from islnoma.orbit import ecef_positions, ecef_velocities, ecef_position, ecef_velocity

log = logging.getLogger('islnoma.feasibility')


@dataclass(frozen=True)
class LinkBudget:
    """
    RF parameters of the links. Powers in W, gains linear, beta in radians.
    """
    f_c: float
    P_tx: float
    G_tx: float
    G_rx: float
    beta: float
    P_sens: float
    beam_ends: str = constants.BEAM_AT_BOTH

    def __post_init__(self):
        for name in ('f_c', 'P_tx', 'G_tx', 'G_rx', 'beta', 'P_sens'):
            if not getattr(self, name) > 0:
                raise ConfigException("link budget field %s must be positive (got %r)" % (name, getattr(self, name)))
        if not self.beta < math.pi / 2:
            raise ConfigException("half-beamwidth %r is not below pi/2" % self.beta)
        if self.beam_ends not in constants.BEAM_ENDS:
            raise ConfigException("beam check must be one of %s (got %r)"
                                  % (", ".join(constants.BEAM_ENDS), self.beam_ends))

    @classmethod
    def from_gain(cls, f_c, P_tx, G_tx, G_rx, P_sens, beam_ends=constants.BEAM_AT_BOTH):
        """
        Budget whose half-beamwidth follows from the receive gain of a conical beam.
        """
        return cls(f_c, P_tx, G_tx, G_rx, beamwidth_from_gain(G_rx), P_sens, beam_ends)

    @property
    def wavelength(self):
        """carrier wavelength in km"""
        return constants.SPEED_OF_LIGHT_KM_S / self.f_c

    @property
    def power_range(self):
        """largest distance (km) at which (c2) holds"""
        return self.wavelength / (4.0 * math.pi) * math.sqrt(self.P_tx * self.G_tx * self.G_rx / self.P_sens)


@dataclass(frozen=True)
class FeasibilityWindow:
    t_start: float
    t_end: float
    members: tuple

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise DomainException("empty feasibility window [%r, %r)" % (self.t_start, self.t_end))

    @property
    def L(self):
        return len(self.members)

    @property
    def duration(self):
        return self.t_end - self.t_start

    @property
    def midpoint(self):
        return 0.5 * (self.t_start + self.t_end)


@dataclass(frozen=True)
class DurationStats:
    count: int
    min: float
    max: float
    mean: float
    std: float


@dataclass(frozen=True)
class WindowStats:
    """
    Window duration statistics keyed by the number L of feasible links.
    """
    per_L: dict = field(default_factory=dict)

    def __getitem__(self, L):
        return self.per_L[L]

    def __contains__(self, L):
        return L in self.per_L

    def levels(self):
        return sorted(self.per_L)


def beamwidth_from_gain(G):
    """
    Half-beamwidth (rad) of a conical beam with linear gain G = 2/(1 - cos(beta)).
    """
    if not G >= 1:
        raise DomainException("conical beam gain must be at least 1 (got %r)" % G)
    return math.acos(1.0 - 2.0 / G)


def gain_from_beamwidth(beta):
    if not 0 < beta <= math.pi:
        raise DomainException("half-beamwidth %r outside (0, pi]" % beta)
    return 2.0 / (1.0 - math.cos(beta))


def radio_horizon(h, R):
    """
    Longest line of sight (km) between two satellites at altitude h above a sphere of radius R.
    """
    if not h > 0 or not R > 0:
        raise DomainException("radio horizon needs positive altitude and radius (got h=%r, R=%r)" % (h, R))
    return 2.0 * math.sqrt(h * (h + 2.0 * R))


def _friis(b, d):
    return b.P_tx * b.G_tx * b.G_rx * (b.wavelength / (4.0 * math.pi * d)) ** 2


def received_power(b, d):
    """
    Friis received power (W) at distance d (km).
    """
    if not d > 0:
        raise DomainException("distance must be positive (got %r)" % d)
    return _friis(b, d)


def body_axes(cfg, sink, t):
    """
    :returns: (u_roll, u_pitch), the unit velocity and the unit orbit normal of the sink
    """
    r = ecef_position(cfg, sink, t)
    v = ecef_velocity(cfg, sink, t)
    n = np.cross(r, v)
    return v / np.linalg.norm(v), n / np.linalg.norm(n)


def beam_check(u_link, axes, beta, tolerance=None):
    """
    True when the unit vector u_link lies within beta of either direction of the roll or pitch axis.
    Boundary directions are inside.
    """
    if tolerance is None:
        tolerance = config.beam_tolerance
    u_roll, u_pitch = axes
    u = np.asarray(u_link, dtype=float)
    alignment = max(abs(float(np.dot(u, u_roll))), abs(float(np.dot(u, u_pitch))))
    return alignment >= math.cos(beta) - tolerance


def _unit(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _alignment(u, r, v):
    """
    Largest |cosine| between the link directions u and the roll or pitch axis of the terminals at (r, v).
    """
    u_roll = _unit(v)
    u_pitch = _unit(np.cross(r, v))
    if u_roll.ndim < u.ndim:
        u_roll = u_roll[:, None, :]
        u_pitch = u_pitch[:, None, :]
    return np.maximum(np.abs(np.sum(u * u_roll, axis=-1)), np.abs(np.sum(u * u_pitch, axis=-1)))


def feasible_mask(cfg, b, sink, sats, times):
    """
    Evaluate (c1), (c2) and (c3) for many transmitters and epochs at once.

    :param sats: transmitting satellites (the sink must not be among them)
    :param times: epochs (s)
    :returns: boolean array of shape (len(times), len(sats))
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if len(sats) == 0:
        return np.zeros((len(times), 0), dtype=bool)
    p = np.array([s.p for s in sats], dtype=float)
    n = np.array([s.n for s in sats], dtype=float)
    r_tx = ecef_positions(cfg, p[None, :], n[None, :], times[:, None])
    r_sink = ecef_positions(cfg, sink.p, sink.n, times)
    v_sink = ecef_velocities(cfg, sink.p, sink.n, times)

    link = r_sink[:, None, :] - r_tx
    d = np.linalg.norm(link, axis=-1)
    with np.errstate(divide='ignore', invalid='ignore'):
        c1 = d <= radio_horizon(cfg.h, cfg.R_earth)
        c2 = _friis(b, d) >= b.P_sens
        u = link / d[..., None]

    threshold = math.cos(b.beta) - config.beam_tolerance
    c3 = _alignment(u, r_sink, v_sink) >= threshold
    if b.beam_ends == constants.BEAM_AT_BOTH:
        v_tx = ecef_velocities(cfg, p[None, :], n[None, :], times[:, None])
        c3 &= _alignment(u, r_tx, v_tx) >= threshold
    return c1 & c2 & c3 & (d > 0)


def is_feasible(cfg, b, sat, sink, t):
    sat.check(cfg)
    sink.check(cfg)
    if sat == sink:
        raise DegeneratePairException("the sink %s cannot link to itself" % sink)
    return bool(feasible_mask(cfg, b, sink, [sat], [t])[0, 0])


def _others(cfg, sink):
    return [s for s in cfg.satellites() if s != sink]


def feasible_set(cfg, b, sink, t):
    """
    Satellites with a feasible link toward the sink at epoch t, in row-major order.
    The number of feasible links L is the length of the result.
    """
    sink.check(cfg)
    others = _others(cfg, sink)
    mask = feasible_mask(cfg, b, sink, others, [t])[0]
    return [s for s, ok in zip(others, mask) if ok]


def _reach(cfg, b):
    return min(radio_horizon(cfg.h, cfg.R_earth), b.power_range)


def _scan_block(cfg, b, sink, others, p, n, times, reach):
    """
    Feasibility over one block of epochs, evaluating only satellites that can be in range.
    """
    mask = np.zeros((len(times), len(others)), dtype=bool)
    t_mid = 0.5 * (times[0] + times[-1])
    half_span = 0.5 * (times[-1] - times[0])
    # largest closing speed between two circular orbits of the same radius
    margin = 2.0 * cfg.radius * cfg.omega * half_span
    r_all = ecef_positions(cfg, p, n, t_mid)
    r_sink = ecef_positions(cfg, sink.p, sink.n, t_mid)
    near = np.flatnonzero(np.linalg.norm(r_all - r_sink, axis=-1) <= reach + margin)
    if len(near):
        mask[:, near] = feasible_mask(cfg, b, sink, [others[i] for i in near], times)
    return mask


def _refine_edge(cfg, b, sink, sat, t_lo, t_hi, state_lo, tolerance):
    while t_hi - t_lo > tolerance:
        t_mid = 0.5 * (t_lo + t_hi)
        if bool(feasible_mask(cfg, b, sink, [sat], [t_mid])[0, 0]) == state_lo:
            t_lo = t_mid
        else:
            t_hi = t_mid
    return 0.5 * (t_lo + t_hi)


def feasibility_timeline(cfg, b, sink, horizon=None, dt=None):
    """
    Split [0, horizon) into windows of constant feasible set.
    The scan samples every multiple of dt up to the horizon and the horizon itself.

    :param horizon: length of the scan (s), one revolution by default
    :param dt: scan step (s), the configured timeline_dt by default
    :returns: list of FeasibilityWindow, consecutive and covering [0, horizon)
    """
    if horizon is None:
        horizon = cfg.T_rev
    if dt is None:
        dt = config.timeline_dt
    if not dt > 0 or not horizon >= dt:
        raise DomainException("timeline needs dt > 0 and horizon >= dt (got dt=%r, horizon=%r)" % (dt, horizon))
    sink.check(cfg)

    others = _others(cfg, sink)
    p = np.array([s.p for s in others], dtype=float)
    n = np.array([s.n for s in others], dtype=float)
    reach = _reach(cfg, b)
    tolerance = config.edge_tolerance
    grid = dt * np.arange(int(math.floor(horizon / dt + 1e-9)) + 1)
    grid[-1] = min(grid[-1], horizon)
    if horizon - grid[-1] > 1e-9 * dt:
        grid = np.append(grid, horizon)
    n_samples = len(grid)
    chunk = max(2, int(config.timeline_chunk))
    log.info("scanning %d epochs for sink %s (%d candidates, reach %.1f km)", n_samples, sink, len(others), reach)

    events = []
    previous = None
    t_previous = None
    initial = None
    for start in range(0, n_samples, chunk):
        times = grid[start:start + chunk]
        mask = _scan_block(cfg, b, sink, others, p, n, times, reach)
        if previous is None:
            initial = mask[0]
        else:
            mask = np.vstack([previous[None, :], mask])
            times = np.concatenate([[t_previous], times])
        changed = np.flatnonzero(np.any(mask[1:] != mask[:-1], axis=1))
        for i in changed:
            for j in np.flatnonzero(mask[i + 1] != mask[i]):
                edge = _refine_edge(cfg, b, sink, others[j], times[i], times[i + 1], bool(mask[i, j]), tolerance)
                events.append((edge, j, bool(mask[i + 1, j])))
        previous = mask[-1]
        t_previous = times[-1]
        log.debug("block starting at %.2f s: %d membership changes", times[0], len(changed))

    events.sort(key=lambda e: (e[0], e[1]))
    state = set(int(j) for j in np.flatnonzero(initial))
    windows = []
    t_start = 0.0

    def _close(t_end):
        members = tuple(others[j] for j in sorted(state))
        if windows and windows[-1].members == members:
            last = windows.pop()
            windows.append(FeasibilityWindow(last.t_start, t_end, members))
        else:
            windows.append(FeasibilityWindow(t_start, t_end, members))

    for edge, j, feasible in events:
        edge = min(max(edge, 0.0), horizon)
        if edge > t_start:
            _close(edge)
            t_start = edge
        if feasible:
            state.add(j)
        else:
            state.discard(j)
    if horizon > t_start:
        _close(horizon)

    levels = [w.L for w in windows]
    log.info("%d feasibility windows, L in [%d, %d]", len(windows), min(levels), max(levels))
    return windows


def window_stats(timeline, periodic=False):
    """
    Duration statistics of the windows per value of L.

    :param periodic: treat the timeline as one period, so the last window continues into the first
    """
    if not timeline:
        raise DomainException("window statistics of an empty timeline")
    durations = [w.duration for w in timeline]
    levels = [w.L for w in timeline]
    if periodic and len(timeline) > 1 and timeline[0].members == timeline[-1].members:
        durations[0] += durations.pop()
        levels.pop()
    by_level = {}
    for L, duration in zip(levels, durations):
        by_level.setdefault(L, []).append(duration)
    per_L = {}
    for L, values in by_level.items():
        values = np.asarray(values)
        per_L[L] = DurationStats(count=len(values), min=float(values.min()), max=float(values.max()),
                                 mean=float(values.mean()), std=float(values.std()))
    return WindowStats(per_L=per_L)


def find_epoch(cfg, b, sink, L_target, horizon=None, dt=None, timeline=None):
    """
    Midpoint of the first window with exactly L_target feasible links.

    :raises InfeasibleScenarioException: when no window has L_target links
    """
    if timeline is None:
        timeline = feasibility_timeline(cfg, b, sink, horizon=horizon, dt=dt)
    for w in timeline:
        if w.L == L_target:
            log.info("epoch %.3f s: first window with L=%d, [%.3f, %.3f)", w.midpoint, L_target, w.t_start, w.t_end)
            return w.midpoint
    raise InfeasibleScenarioException("no window with L=%d feasible links" % L_target)
