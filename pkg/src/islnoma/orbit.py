"""
Walker Delta constellation kinematics in the ECEF frame.

A satellite (p, n) sits at r(t) = (R+h) Xi_p Pi e(t) with
e(t) = [cos(wt + g), sin(wt + g), 0], where Pi tilts the orbit by the
inclination, Xi_p turns it by the right ascension b_p = 2pi(p-1)/P and the
phase g = 2pi(n-1)/N + 2piF(p-1)/K spreads satellites along and across planes.
Velocities are the analytic time derivative. The frame is treated as inertial
over the observation horizon.

The vectorized helpers :func:`ecef_positions` and :func:`ecef_velocities`
broadcast over arrays of planes, slots and epochs; everything else is built
on them.
"""

__author__ = 'islnoma'

import math
import re
from dataclasses import dataclass

import numpy as np

from islnoma import constants
from islnoma.exceptions import ConfigException, SatIndexException, DegeneratePairException, DomainException


@dataclass(frozen=True)
class WalkerConfig:
    """
    Walker Delta constellation parameters. Lengths in km, angles in radians.

    :param K: total number of satellites
    :param P: number of orbital planes
    :param h: altitude
    :param alpha: inclination in [0, pi/2]
    :param F_phasing: phasing parameter in [0, P)
    :param R_earth: Earth radius
    :param T_rev: revolution period (s); the angular speed is 2pi/T_rev
    """
    K: int
    P: int
    h: float
    alpha: float
    F_phasing: int
    R_earth: float = constants.EARTH_RADIUS_KM
    T_rev: float = constants.REVOLUTION_PERIOD_S

    def __post_init__(self):
        if int(self.K) != self.K or int(self.P) != self.P or self.K < 1 or self.P < 1:
            raise ConfigException("K and P must be positive integers (got K=%s, P=%s)" % (self.K, self.P))
        if self.K % self.P:
            raise ConfigException("K=%d satellites cannot be spread evenly over P=%d planes" % (self.K, self.P))
        if not self.h > 0 or not self.R_earth > 0:
            raise ConfigException("altitude and Earth radius must be positive")
        if not 0.0 <= self.alpha <= math.pi / 2:
            raise ConfigException("inclination %r outside [0, pi/2]" % self.alpha)
        if int(self.F_phasing) != self.F_phasing or not 0 <= self.F_phasing < self.P:
            raise ConfigException("phasing parameter %r outside [0, %d)" % (self.F_phasing, self.P))
        if not self.T_rev > 0:
            raise ConfigException("revolution period must be positive")

    @classmethod
    def from_degrees(cls, K, P, h, inclination_deg, F_phasing, **kwargs):
        return cls(K, P, h, math.radians(inclination_deg), F_phasing, **kwargs)

    @property
    def N(self):
        return self.K // self.P

    @property
    def omega(self):
        return 2.0 * math.pi / self.T_rev

    @property
    def radius(self):
        return self.R_earth + self.h

    def satellites(self):
        """
        All satellites of the constellation in row-major (p, n) order.
        """
        return [SatIndex(p, n) for p in range(1, self.P + 1) for n in range(1, self.N + 1)]


@dataclass(frozen=True, order=True)
class SatIndex:
    """
    The n-th satellite of the p-th orbital plane, both counted from 1.
    """
    p: int
    n: int

    def check(self, cfg):
        if not (1 <= self.p <= cfg.P and 1 <= self.n <= cfg.N):
            raise SatIndexException("satellite %s outside the %dx%d constellation" % (self, cfg.P, cfg.N))
        return self

    def to_linear(self, cfg):
        self.check(cfg)
        return (self.p - 1) * cfg.N + self.n

    @classmethod
    def from_linear(cls, cfg, index):
        if not 1 <= index <= cfg.K:
            raise SatIndexException("linear index %r outside [1, %d]" % (index, cfg.K))
        p, n = divmod(int(index) - 1, cfg.N)
        return cls(p + 1, n + 1)

    @classmethod
    def parse(cls, text):
        """
        Parse "p:n", "p,n" or "(p,n)".
        """
        m = re.match(r'^\s*\(?\s*(\d+)\s*[:,]\s*(\d+)\s*\)?\s*$', str(text))
        if m is None:
            raise ConfigException("cannot parse satellite index '%s'" % text)
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self):
        return "%d:%d" % (self.p, self.n)


def sat_index(cfg, p, n):
    """
    Checked SatIndex for plane p and slot n of cfg.
    """
    return SatIndex(int(p), int(n)).check(cfg)


@dataclass(frozen=True, eq=False)
class EcefState:
    r: np.ndarray
    v: np.ndarray
    t: float


def plane_rotation(cfg, p):
    """
    Rotation Xi_p about the z axis by the right ascension of plane p.
    """
    beta = 2.0 * math.pi * (p - 1) / cfg.P
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def inclination_rotation(cfg):
    c, s = math.cos(cfg.alpha), math.sin(cfg.alpha)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def _orbit_frame(cfg, p, n, t, derivative):
    p = np.asarray(p, dtype=float)
    n = np.asarray(n, dtype=float)
    t = np.asarray(t, dtype=float)
    beta = 2.0 * math.pi * (p - 1.0) / cfg.P
    theta = cfg.omega * t + 2.0 * math.pi * (n - 1.0) / cfg.N + 2.0 * math.pi * cfg.F_phasing * (p - 1.0) / cfg.K
    if derivative:
        ex, ey, scale = -np.sin(theta), np.cos(theta), cfg.radius * cfg.omega
    else:
        ex, ey, scale = np.cos(theta), np.sin(theta), cfg.radius
    # Pi e
    x0 = math.cos(cfg.alpha) * ex
    y0 = ey
    z0 = math.sin(cfg.alpha) * ex
    # Xi_p (Pi e)
    cb, sb = np.cos(beta), np.sin(beta)
    x = cb * x0 - sb * y0
    y = sb * x0 + cb * y0
    return scale * np.stack(np.broadcast_arrays(x, y, z0), axis=-1)


def ecef_positions(cfg, p, n, t):
    """
    Positions (km) for broadcastable arrays of planes, slots and epochs.

    :returns: array of shape broadcast(p, n, t) + (3,)
    """
    return _orbit_frame(cfg, p, n, t, derivative=False)


def ecef_velocities(cfg, p, n, t):
    """
    Velocities (km/s), shaped like :func:`ecef_positions`.
    """
    return _orbit_frame(cfg, p, n, t, derivative=True)


def ecef_position(cfg, s, t):
    s.check(cfg)
    return ecef_positions(cfg, s.p, s.n, t)


def ecef_velocity(cfg, s, t):
    s.check(cfg)
    return ecef_velocities(cfg, s.p, s.n, t)


def ecef_state(cfg, s, t):
    return EcefState(r=ecef_position(cfg, s, t), v=ecef_velocity(cfg, s, t), t=float(t))


def distance(cfg, a, b, t):
    """
    Distance (km) between two satellites at epoch t.
    """
    a.check(cfg)
    b.check(cfg)
    if a == b:
        return 0.0
    return float(np.linalg.norm(ecef_position(cfg, a, t) - ecef_position(cfg, b, t)))


def radial_speed(cfg, a, sink, t):
    """
    Rate of change (km/s) of the distance between a and the sink. Positive when receding.

    :raises DegeneratePairException: when a is the sink
    """
    a.check(cfg)
    sink.check(cfg)
    if a == sink:
        raise DegeneratePairException("radial speed of satellite %s relative to itself" % a)
    dr = ecef_position(cfg, a, t) - ecef_position(cfg, sink, t)
    dv = ecef_velocity(cfg, a, t) - ecef_velocity(cfg, sink, t)
    return float(np.dot(dr, dv) / np.linalg.norm(dr))


def doppler_shift(cfg, a, sink, t, f_c):
    """
    Carrier frequency shift (Hz) of the link between a and the sink: v_radial f_c / c,
    positive while the distance grows.
    """
    if not f_c > 0:
        raise DomainException("carrier frequency must be positive (got %r)" % f_c)
    return radial_speed(cfg, a, sink, t) * f_c / constants.SPEED_OF_LIGHT_KM_S


def sink_plane(cfg, sink, members):
    """
    Members that share the orbital plane of the sink.

    :raises DomainException: when the sink or a member is not in the constellation
    """
    sink.check(cfg)
    return [m for m in members if m.check(cfg).p == sink.p]
