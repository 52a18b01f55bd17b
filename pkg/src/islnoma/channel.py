"""
The discrete-time multiple access channel seen by the sink.

The sink oversamples each symbol period T by S. A link with complex amplitude A
and normalized Doppler shift nu contributes A P v(nu) to the S samples of a
symbol, with v(nu) = [1, e^{j2pi nu}, ..., e^{j2pi nu (S-1)}] and P the diagonal
of composite pulse samples. The sampled noise is coloured with covariance
sigma^2 C_pp; whitening by the Cholesky factor T_pp of C_pp gives the effective
pulse matrix P_eff = T_pp^-1 P and white noise.

For a group of links the effective channel is C = P_eff V A and the per-symbol
channel at symbol u is H[u] = C E[u] / sqrt(rho), with
E[u] = diag(e^{j2pi S nu u}).
"""

__author__ = 'islnoma'

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from islnoma import config, constants
from islnoma.exceptions import DomainException, PulseModelException, SingularPulseException, \
    UndefinedSeparationException
from islnoma.feasibility import received_power
from islnoma.orbit import distance, doppler_shift

log = logging.getLogger('islnoma.channel')


@dataclass(frozen=True, eq=False)
class PulseModel:
    """
    Samples of the composite pulse and the noise whitening built from them.

    :param S: oversampling factor
    :param T: symbol period (s)
    :param eps: sampling phase offset (s)
    :param p_samples: p(s T_c + eps), s = 0..S-1
    :param C_pp: noise correlation p((s1-s2) T_c + T)
    :param T_pp: lower Cholesky factor of C_pp
    :param P_eff: T_pp^-1 diag(p_samples)
    :param E_p: sum of the squared diagonal of P_eff
    """
    S: int
    T: float
    eps: float
    shape: str
    p_samples: np.ndarray
    P_diag: np.ndarray
    C_pp: np.ndarray
    T_pp: np.ndarray
    P_eff: np.ndarray
    E_p: float

    @property
    def T_c(self):
        return self.T / self.S

    @classmethod
    def ideal(cls, S, T=1.0):
        """
        Unit samples with white noise: P_eff = I and E_p = S.
        """
        eye = np.eye(S)
        return cls(S=S, T=T, eps=0.0, shape='ideal', p_samples=np.ones(S), P_diag=eye.copy(), C_pp=eye.copy(),
                   T_pp=eye.copy(), P_eff=eye.copy(), E_p=float(S))


@dataclass(frozen=True)
class LinkParams:
    """
    One feasible link: amplitude A (|A|^2 is the received power over the reference power),
    Doppler shift f (Hz), normalized shift nu in [0, 1) and delay tau (s).
    """
    A: complex
    f: float
    nu: float
    tau: float = 0.0
    sat: object = None
    index: int = None

    def __post_init__(self):
        if not 0.0 <= self.nu < 1.0:
            raise DomainException("normalized Doppler %r outside [0, 1)" % self.nu)


@dataclass(frozen=True, eq=False)
class GroupChannel:
    """
    Channel of one group of links sharing a fraction rho of the degrees of freedom.

    :param members: link indices of the columns
    :param V: S x L Vandermonde matrix of the normalized Doppler shifts
    :param A_diag: diagonal matrix of amplitudes
    :param C: P_eff V A_diag
    :param H: C / sqrt(rho)
    """
    members: tuple
    nus: np.ndarray
    V: np.ndarray
    A_diag: np.ndarray
    rho: float
    C: np.ndarray
    H: np.ndarray

    @property
    def S(self):
        return self.V.shape[0]

    @property
    def L(self):
        return self.V.shape[1]

    @property
    def amplitudes(self):
        return np.diag(self.A_diag)

    def doppler_phases(self, u):
        """
        Diagonal of E[u], e^{j2pi S nu u} per column. An array of symbol indices gives one row per index.
        """
        return np.exp(2j * np.pi * self.S * np.multiply.outer(np.asarray(u, dtype=float), self.nus))

    def E(self, u):
        return np.diag(self.doppler_phases(u))

    def at(self, u):
        """
        Channel matrix H E[u] of symbol interval u.
        """
        return self.H * self.doppler_phases(u)[None, :]

    def with_rho(self, rho):
        _check_rho(rho)
        return replace(self, rho=float(rho), H=self.C / math.sqrt(rho))

    def subset(self, positions, rho=None):
        """
        Group made of the given columns of this one.
        """
        positions = list(positions)
        if rho is None:
            rho = self.rho
        _check_rho(rho)
        C = self.C[:, positions]
        return GroupChannel(members=tuple(self.members[i] for i in positions), nus=self.nus[positions],
                            V=self.V[:, positions], A_diag=self.A_diag[np.ix_(positions, positions)],
                            rho=float(rho), C=C, H=C / math.sqrt(rho))


def _triangular(t, T):
    t = np.asarray(t, dtype=float)
    return np.where((t > 0) & (t < 2 * T), 1.0 - np.abs(t - T) / T, 0.0)


def _raised_cosine(t, T, rolloff):
    t = np.asarray(t, dtype=float)
    x = (t - T) / T
    denom = 1.0 - (2.0 * rolloff * x) ** 2
    with np.errstate(divide='ignore', invalid='ignore'):
        value = np.sinc(x) * np.cos(np.pi * rolloff * x) / denom
    value = np.where(np.abs(denom) < 1e-12, 0.25 * np.pi * np.sinc(0.5 / rolloff), value)
    return np.where((t > 0) & (t < 2 * T), value, 0.0)


def composite_pulse(t, T, shape=constants.PULSE_TRIANGULAR, rolloff=0.25):
    """
    Composite transmit/receive pulse centred at T and zero outside (0, 2T).
    """
    if shape == constants.PULSE_TRIANGULAR:
        return _triangular(t, T)
    if shape == constants.PULSE_RAISED_COSINE:
        if not 0 < rolloff <= 1:
            raise DomainException("raised-cosine roll-off %r outside (0, 1]" % rolloff)
        return _raised_cosine(t, T, rolloff)
    raise DomainException("unknown pulse shape '%s'" % shape)


def build_pulse(S, T, shape=constants.PULSE_TRIANGULAR, eps=None, rolloff=0.25):
    """
    Sample the composite pulse and build the noise whitening.

    :param S: oversampling factor, at least 2
    :param T: symbol period (s)
    :param eps: sampling phase offset in [0, T/S), T/(2S) by default
    :raises SingularPulseException: when a pulse sample is zero
    :raises PulseModelException: when the noise correlation is not positive definite
    """
    if int(S) != S or S < 2:
        raise DomainException("oversampling factor must be an integer above 1 (got %r)" % S)
    if not T > 0:
        raise DomainException("symbol period must be positive (got %r)" % T)
    S = int(S)
    T_c = T / S
    if eps is None:
        eps = 0.5 * T_c
    if not 0 <= eps < T_c:
        raise DomainException("sampling offset %r outside [0, T_c)" % eps)

    p_samples = composite_pulse(np.arange(S) * T_c + eps, T, shape, rolloff)
    if np.any(p_samples == 0):
        raise SingularPulseException("pulse '%s' has a zero sample at offset %r" % (shape, eps))
    C_pp = linalg.toeplitz(composite_pulse(np.arange(S) * T_c + T, T, shape, rolloff))
    try:
        T_pp = linalg.cholesky(C_pp, lower=True)
    except linalg.LinAlgError as ex:
        raise PulseModelException("noise correlation of pulse '%s' is not positive definite: %s" % (shape, ex))
    P_diag = np.diag(p_samples)
    P_eff = linalg.solve_triangular(T_pp, P_diag, lower=True)
    E_p = float(np.sum(np.diag(P_eff) ** 2))
    log.debug("pulse %s S=%d eps=%g: E_p=%.6f", shape, S, eps, E_p)
    return PulseModel(S=S, T=float(T), eps=float(eps), shape=shape, p_samples=p_samples, P_diag=P_diag,
                      C_pp=C_pp, T_pp=T_pp, P_eff=P_eff, E_p=E_p)


def normalized_doppler(f, T_c):
    """
    f T_c folded into [0, 1).
    """
    nu = float(f * T_c) % 1.0
    if nu >= 1.0:
        nu = 0.0
    return nu


def link_params(A, f, T_c, tau=0.0, sat=None, index=None):
    return LinkParams(A=complex(A), f=float(f), nu=normalized_doppler(f, T_c), tau=tau, sat=sat, index=index)


def link_amplitude(b, d, phase=0.0, reference_power=None):
    """
    Complex amplitude with |A|^2 = received power / reference power and argument phase.
    """
    if reference_power is None:
        reference_power = config.reference_power
    return complex(math.sqrt(received_power(b, d) / reference_power) * np.exp(1j * phase))


def vandermonde(nus, S):
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    if np.any(nus < 0) or np.any(nus >= 1):
        raise DomainException("normalized Doppler shifts must lie in [0, 1)")
    return np.exp(2j * np.pi * np.outer(np.arange(S), nus))


def link_energies(pm, nus):
    """
    ||P_eff v(nu)||^2 per normalized shift, the received energy per unit |A|^2.
    """
    return np.sum(np.abs(pm.P_eff @ vandermonde(nus, pm.S)) ** 2, axis=0)


def _check_rho(rho):
    if not 0 < rho <= 1:
        raise DomainException("DoF fraction %r outside (0, 1]" % rho)


def group_channel(pm, links, rho=1.0):
    """
    Effective channel C = P_eff V A of a group of links and H = C / sqrt(rho).
    """
    _check_rho(rho)
    if not links:
        raise DomainException("a group needs at least one link")
    nus = np.array([l.nu for l in links])
    amplitudes = np.array([l.A for l in links], dtype=complex)
    V = vandermonde(nus, pm.S)
    C = pm.P_eff @ (V * amplitudes[None, :])
    members = tuple(l.index if l.index is not None else i + 1 for i, l in enumerate(links))
    gc = GroupChannel(members=members, nus=nus, V=V, A_diag=np.diag(amplitudes), rho=float(rho), C=C,
                      H=C / math.sqrt(rho))
    if len(links) > 1 and min_separation(nus) > config.nu_collision_tolerance \
            and rank_of(C) < min(pm.S, len(links)):
        log.warning("group %s has distinct Doppler shifts but rank %d < %d", members, rank_of(C),
                    min(pm.S, len(links)))
    return gc


def rank_of(C, tolerance=None):
    if tolerance is None:
        tolerance = config.rank_tolerance
    mu = linalg.svdvals(np.atleast_2d(C))
    if mu.size == 0 or mu[0] == 0:
        return 0
    return int(np.sum(mu > tolerance * mu[0]))


def condition_number(C):
    """
    Ratio of the largest to the smallest of the min(S, L) singular values (inf when singular).
    """
    mu = linalg.svdvals(np.atleast_2d(C))
    if mu[-1] == 0:
        return math.inf
    return float(mu[0] / mu[-1])


def wraparound_distance(nu1, nu2):
    """
    Distance between two normalized frequencies on the unit circle, in [0, 0.5].
    """
    d = abs(nu1 - nu2) % 1.0
    return min(d, 1.0 - d)


def min_separation(nus):
    nus = list(nus)
    if len(nus) < 2:
        raise UndefinedSeparationException("separation of fewer than two Doppler shifts")
    return min(wraparound_distance(nus[i], nus[j]) for i in range(len(nus)) for j in range(i + 1, len(nus)))


def noise_variance(F_dB, T_sym, T_ref=constants.NOISE_REFERENCE_TEMPERATURE_K, bandwidth=None,
                   reference_power=None):
    """
    Thermal noise power k T_ref B F over the reference power, with B = 1/T_sym unless given.
    """
    if not T_sym > 0:
        raise DomainException("symbol period must be positive (got %r)" % T_sym)
    if bandwidth is None:
        bandwidth = 1.0 / T_sym
    if reference_power is None:
        reference_power = config.reference_power
    return constants.BOLTZMANN * T_ref * bandwidth * 10.0 ** (F_dB / 10.0) / reference_power


def build_links(cfg, b, sink, members, t, pm, seed=None, reference_power=None):
    """
    Link parameters of the given transmitters toward the sink at epoch t.

    Links are ordered by (plane, slot) and numbered from 1 in that order; phases are
    drawn uniformly from a generator seeded with seed.
    """
    members = sorted(members)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=len(members))
    links = []
    for i, (sat, phase) in enumerate(zip(members, phases)):
        d = distance(cfg, sat, sink, t)
        f = doppler_shift(cfg, sat, sink, t, b.f_c)
        A = link_amplitude(b, d, phase, reference_power=reference_power)
        links.append(link_params(A, f, pm.T_c, sat=sat, index=i + 1))
        log.debug("link %d from %s: d=%.3f km f=%.6g Hz |A|^2=%.6g", i + 1, sat, d, f, abs(A) ** 2)
    log.info("%d links toward %s at t=%.3f s", len(links), sink, t)
    return links
