"""
Sum-rate capacity, DoF allocation and fairness of NOMA, OMA and hybrid groupings.

A group k with DoF fraction rho_k and effective channel C_k achieves
R_k = rho_k log2 det(I + C_k C_k^H / (sigma2 rho_k)). Pure NOMA is the single
group with rho = 1, pure OMA the all-singleton grouping. Rates are attributed
to satellites through the max-SINR decode order of each group.
"""

__author__ = 'islnoma'

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from islnoma import constants
from islnoma.channel import group_channel, rank_of, vandermonde
from islnoma.exceptions import AllocationException, DomainException, ShapeException, UndefinedFairnessException
from islnoma.receiver import sic_order

log = logging.getLogger('islnoma.capacity')

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class DofAllocation:
    rhos: tuple
    mode: str = constants.DOF_UNIFORM

    def __post_init__(self):
        rhos = tuple(float(r) for r in self.rhos)
        object.__setattr__(self, 'rhos', rhos)
        if not rhos or any(not r > 0 for r in rhos):
            raise AllocationException("DoF fractions must be positive (got %r)" % (rhos,))
        if abs(math.fsum(rhos) - 1.0) > 1e-12:
            raise AllocationException("DoF fractions sum to %r, not 1" % math.fsum(rhos))

    @classmethod
    def uniform(cls, G):
        return cls(tuple([1.0 / G] * G), constants.DOF_UNIFORM)

    @classmethod
    def proportional(cls, weights, mode):
        weights = np.asarray(weights, dtype=float)
        if np.any(~(weights > 0)):
            raise DomainException("proportional DoF allocation needs positive weights (got %r)" % (weights,))
        return cls(tuple(weights / math.fsum(weights)), mode)

    def __len__(self):
        return len(self.rhos)

    def __iter__(self):
        return iter(self.rhos)

    def __getitem__(self, k):
        return self.rhos[k]


@dataclass
class RateReport:
    """
    Per-satellite and per-group rates (bits/s/Hz) of a grouping.

    :param per_satellite_rates: link index -> rate
    :param group_of: link index -> group position
    :param stage_of: link index -> decode stage within its group
    """
    per_satellite_rates: dict
    group_rates: tuple
    C_sum: float
    fairness: float
    group_of: dict = field(default_factory=dict)
    stage_of: dict = field(default_factory=dict)
    dof: DofAllocation = None
    warnings: tuple = ()

    def rates(self):
        return [self.per_satellite_rates[i] for i in sorted(self.per_satellite_rates)]

    def to_json(self):
        return {
            'rates': [{'index': i, 'group': self.group_of.get(i), 'stage': self.stage_of.get(i),
                       'rate': self.per_satellite_rates[i]} for i in sorted(self.per_satellite_rates)],
            'group_rates': list(self.group_rates),
            'C_sum': self.C_sum,
            'fairness': self.fairness,
            'dof': list(self.dof.rhos) if self.dof is not None else None,
            'dof_mode': self.dof.mode if self.dof is not None else None,
            'warnings': list(self.warnings),
        }

    def csv_rows(self):
        """
        One row per satellite (index, group, stage, rate) followed by the C_sum and fairness footers.
        """
        rows = [[i, self.group_of.get(i, ''), self.stage_of.get(i, ''), self.per_satellite_rates[i]]
                for i in sorted(self.per_satellite_rates)]
        rows.append(['C_sum', '', '', self.C_sum])
        rows.append(['fairness', '', '', self.fairness])
        return rows


@dataclass(frozen=True)
class BoundsReport:
    """
    Capacities of a grouping against its NOMA and OMA references and the rank based bounds.
    """
    c_oma_opt: float
    c_hybrid: float
    c_hybrid_trace_dof: float
    c_noma: float
    amgm_bound: float
    equal_rank_estimate: float
    maxmin_estimate: float

    @property
    def slacks(self):
        return {
            'noma': self.c_noma - self.c_hybrid,
            'oma': self.c_hybrid - self.c_oma_opt,
            'oma_trace_dof': self.c_hybrid_trace_dof - self.c_oma_opt,
            'amgm': self.amgm_bound - self.c_hybrid,
            'maxmin': self.equal_rank_estimate - self.maxmin_estimate,
        }

    def holds(self, tolerance=1e-9):
        """
        True when the inequalities that hold for every DoF allocation are satisfied.
        The 'oma' slack depends on the allocation and is not part of the check.
        """
        slacks = self.slacks
        return all(slacks[k] >= -tolerance for k in ('noma', 'oma_trace_dof', 'amgm', 'maxmin'))


def _log2_1p(x):
    return np.log1p(x) / _LN2


def _rate_from_singular_values(mu, rho, sigma2):
    return float(rho * np.sum(_log2_1p(mu ** 2 / (sigma2 * rho))))


def _check_sigma2(sigma2):
    if not sigma2 > 0:
        raise DomainException("noise variance must be positive (got %r)" % sigma2)


def group_rate(gc, sigma2):
    """
    rho sum_s log2(1 + mu_s^2 / (sigma2 rho)) over the singular values mu_s of C.
    """
    _check_sigma2(sigma2)
    return _rate_from_singular_values(linalg.svdvals(gc.C), gc.rho, sigma2)


def log_det_rate(gc, sigma2):
    """
    rho log2 det(I + H^H H / sigma2) through a Cholesky factor.
    """
    _check_sigma2(sigma2)
    gram = np.eye(gc.L) + (gc.H.conj().T @ gc.H) / sigma2
    factor = linalg.cholesky(gram, lower=True)
    return float(gc.rho * 2.0 * np.sum(np.log2(np.real(np.diag(factor)))))


def _check_budget(groups):
    total = math.fsum(gc.rho for gc in groups)
    if abs(total - 1.0) > 1e-9:
        raise AllocationException("DoF fractions of %d groups sum to %r, not 1" % (len(groups), total))


def sum_capacity(groups, sigma2):
    _check_budget(groups)
    return math.fsum(group_rate(gc, sigma2) for gc in groups)


def noma_capacity(all_links, pm, sigma2):
    """
    Capacity of all links superposed in one group with every degree of freedom.
    """
    return group_rate(group_channel(pm, all_links, 1.0), sigma2)


def oma_capacity(amps, rhos, E_p, sigma2):
    """
    sum_l rho_l log2(1 + E_p |A_l|^2 / (sigma2 rho_l)).

    :param amps: |A_l|^2 per link
    :param rhos: DoF fractions (a DofAllocation or a sequence)
    :param E_p: pulse energy, a scalar or one energy per link (see channel.link_energies)
    """
    _check_sigma2(sigma2)
    amps = np.asarray(amps, dtype=float)
    rhos = np.asarray(DofAllocation(tuple(rhos)).rhos)
    if amps.shape != rhos.shape:
        raise ShapeException("%d amplitudes but %d DoF fractions" % (amps.size, rhos.size))
    energy = np.broadcast_to(np.asarray(E_p, dtype=float), amps.shape)
    return float(np.sum(rhos * _log2_1p(energy * amps / (sigma2 * rhos))))


def oma_opt_dof(amps):
    """
    Capacity maximizing OMA allocation, proportional to the received powers.
    """
    amps = np.asarray(amps, dtype=float)
    if np.any(~(amps > 0)):
        raise DomainException("OMA allocation needs positive powers (got %r)" % (amps,))
    return DofAllocation.proportional(amps, constants.DOF_OPTIMIZED)


def uniform_dof(G):
    return DofAllocation.uniform(G)


def hybrid_opt_dof(groups):
    """
    rho_k proportional to the mean squared singular value ||C_k||_F^2 / L_k of each group.
    """
    weights = [float(np.sum(np.abs(gc.C) ** 2)) / gc.L for gc in groups]
    if any(w <= 0 for w in weights):
        raise DomainException("group without signal energy cannot be given an optimized DoF share")
    return DofAllocation.proportional(weights, constants.DOF_OPTIMIZED)


def trace_dof(groups):
    """
    rho_k proportional to ||C_k||_F^2. With this allocation the grouping is never below optimized OMA.
    """
    weights = [float(np.sum(np.abs(gc.C) ** 2)) for gc in groups]
    return DofAllocation.proportional(weights, constants.DOF_TRACE)


def allocate(groups, mode):
    """
    Return the groups with DoF fractions set by mode (uniform, optimized or trace).
    """
    if mode == constants.DOF_UNIFORM:
        dof = uniform_dof(len(groups))
    elif mode == constants.DOF_OPTIMIZED:
        dof = hybrid_opt_dof(groups)
    elif mode == constants.DOF_TRACE:
        dof = trace_dof(groups)
    else:
        raise DomainException("unknown DoF mode '%s'" % mode)
    return [gc.with_rho(rho) for gc, rho in zip(groups, dof.rhos)], dof


def fairness(rates):
    """
    Jain index (sum r)^2 / (L sum r^2).
    """
    rates = np.asarray(list(rates), dtype=float)
    if rates.size == 0:
        raise UndefinedFairnessException("fairness of an empty rate set")
    if np.any(rates < 0):
        raise DomainException("rates must not be negative")
    squares = np.sum(rates ** 2)
    if squares == 0:
        raise UndefinedFairnessException("fairness of all-zero rates")
    return float(np.sum(rates) ** 2 / (rates.size * squares))


def individual_rates(groups, sigma2, dof=None):
    """
    Attribute rho_k log2(1 + SINR) of each SIC stage to the satellite decoded there.
    """
    _check_sigma2(sigma2)
    _check_budget(groups)
    per_satellite, group_of, stage_of, group_rates = {}, {}, {}, []
    for k, gc in enumerate(groups):
        trace = sic_order(gc.H, sigma2)
        total = 0.0
        for m, (col, gain) in enumerate(zip(trace.order, trace.log_gains)):
            index = gc.members[col]
            per_satellite[index] = gc.rho * gain
            group_of[index] = k
            stage_of[index] = m
            total += gc.rho * gain
        group_rates.append(total)
    c_sum = math.fsum(per_satellite.values())
    return RateReport(per_satellite_rates=per_satellite, group_rates=tuple(group_rates), C_sum=c_sum,
                      fairness=fairness(per_satellite.values()), group_of=group_of, stage_of=stage_of, dof=dof)


def two_sat_oracle(A1, A2, nu1, nu2, pm, sigma2):
    """
    Closed-form SINRs of two satellites, satellite 1 decoded first.

    With g_l = P_eff v(nu_l) and E_l = ||g_l||^2:
    SINR1 = [sigma2 |A1|^2 E1 + |A1|^2 |A2|^2 (E1 E2 - |g1^H g2|^2)] / [sigma2 (|A2|^2 E2 + sigma2)],
    SINR2 = |A2|^2 E2 / sigma2 and SINR1_min = |A1|^2 E1 / (|A2|^2 E2 + sigma2), reached when nu1 = nu2.
    For a diagonal P_eff, E1 = E2 = E_p.

    :returns: (SINR1, SINR2, SINR1_min)
    """
    _check_sigma2(sigma2)
    g = pm.P_eff @ vandermonde([nu1, nu2], pm.S)
    E1 = float(np.real(np.vdot(g[:, 0], g[:, 0])))
    E2 = float(np.real(np.vdot(g[:, 1], g[:, 1])))
    cross = abs(np.vdot(g[:, 0], g[:, 1])) ** 2
    a1, a2 = abs(A1) ** 2, abs(A2) ** 2
    sinr1 = (sigma2 * a1 * E1 + a1 * a2 * max(E1 * E2 - cross, 0.0)) / (sigma2 * (a2 * E2 + sigma2))
    return sinr1, a2 * E2 / sigma2, a1 * E1 / (a2 * E2 + sigma2)


def jensen_bounds_check(groups, sigma2):
    """
    Compare a grouping with pure NOMA, optimized OMA and the rank based bounds.

    :returns: BoundsReport
    """
    _check_sigma2(sigma2)
    _check_budget(groups)
    full = np.hstack([gc.C for gc in groups])
    energies = np.sum(np.abs(full) ** 2, axis=0)
    c_noma = _rate_from_singular_values(linalg.svdvals(full), 1.0, sigma2)
    c_oma_opt = float(_log2_1p(np.sum(energies) / sigma2))
    c_hybrid = math.fsum(group_rate(gc, sigma2) for gc in groups)
    traced, _ = allocate(groups, constants.DOF_TRACE)
    c_trace = math.fsum(group_rate(gc, sigma2) for gc in traced)

    amgm, equal_rank = 0.0, 0.0
    for gc in groups:
        energy = float(np.sum(np.abs(gc.C) ** 2))
        r = rank_of(gc.C)
        if r:
            amgm += r * gc.rho * float(_log2_1p(energy / (sigma2 * gc.rho * r)))
        equal_rank += gc.L * gc.rho * float(_log2_1p(energy / (sigma2 * gc.rho * gc.L)))
    L_min = min(gc.L for gc in groups)
    maxmin = L_min * math.fsum(gc.rho * float(_log2_1p(float(np.sum(np.abs(gc.C) ** 2)) / (sigma2 * gc.rho * gc.L)))
                               for gc in groups)
    report = BoundsReport(c_oma_opt=c_oma_opt, c_hybrid=c_hybrid, c_hybrid_trace_dof=c_trace, c_noma=c_noma,
                          amgm_bound=amgm, equal_rank_estimate=equal_rank, maxmin_estimate=maxmin)
    log.debug("bounds: %s", report.slacks)
    return report
