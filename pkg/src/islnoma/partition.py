"""
Grouping of the feasible links into hybrid NOMA-OMA groups.

Two strategies are provided. anticluster() spreads the Doppler shifts over G
groups by maximizing the within-group Doppler variance with a best-swap
heuristic, so that the members of every group have well separated Doppler
shifts. max_fairness_search() seeds one group per link in the sink's orbital
plane and assigns the remaining links so that the Jain fairness index of the
resulting rates is maximal, over all assignments, a random sample of them or
by local single-link moves.

Link positions are 0-based inside the package; serialized partitions use the
1-based link numbering of build_links.
"""

__author__ = 'islnoma'

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from islnoma import config, constants
from islnoma.capacity import DofAllocation, allocate, individual_rates
from islnoma.channel import group_channel, min_separation
from islnoma.exceptions import DomainException, EmptyCandidateSetException, PrepartitionException, \
    SearchAbortedException

log = logging.getLogger('islnoma.partition')


@dataclass
class Partition:
    """
    Disjoint groups of link positions covering 0..L-1.

    :param groups: tuple of tuples of 0-based link positions
    :param dof: DoF allocation the groups were evaluated with, if any
    :param mode: how the partition was obtained
    :param objective_history: variance objective after the start and after every accepted swap (anticlustering)
    """
    groups: tuple
    dof: DofAllocation = None
    mode: str = ''
    objective_history: tuple = ()

    def __post_init__(self):
        self.groups = tuple(tuple(int(i) for i in g) for g in self.groups)

    @property
    def G(self):
        return len(self.groups)

    @property
    def L(self):
        return sum(len(g) for g in self.groups)

    def canonical(self):
        """
        Groups with members ascending, ordered by their smallest member.
        """
        return tuple(sorted(tuple(sorted(g)) for g in self.groups))

    def labels(self):
        labels = np.empty(self.L, dtype=int)
        for k, g in enumerate(self.groups):
            labels[list(g)] = k
        return labels

    def validate(self, L=None):
        if L is None:
            L = self.L
        if any(len(g) == 0 for g in self.groups):
            raise DomainException("partition has an empty group")
        members = sorted(i for g in self.groups for i in g)
        if members != list(range(L)):
            raise DomainException("groups %r are not a disjoint cover of %d links" % (self.groups, L))
        return self

    def to_json(self):
        return {
            'groups': [[i + 1 for i in sorted(g)] for g in self.groups],
            'dof': list(self.dof.rhos) if self.dof is not None else None,
            'dof_mode': self.dof.mode if self.dof is not None else None,
            'mode': self.mode,
        }

    @classmethod
    def from_json(cls, data):
        groups = tuple(tuple(i - 1 for i in g) for g in data['groups'])
        dof = None
        if data.get('dof'):
            dof = DofAllocation(tuple(data['dof']), data.get('dof_mode') or constants.DOF_OPTIMIZED)
        return cls(groups=groups, dof=dof, mode=data.get('mode', '')).validate()

    def __str__(self):
        return " ".join("{%s}" % ",".join(str(i + 1) for i in g) for g in self.canonical())


@dataclass(frozen=True)
class SearchConfig:
    """
    How max_fairness_search explores the assignments of the unseeded links.

    :param mode: 'exhaustive', 'random-sample' or 'swap-heuristic'
    :param count: candidates drawn in random-sample mode (config.sample_count by default)
    :param seed: seed of the random-sample generator
    :param dof_mode: DoF allocation used to score a candidate
    :param group_size_cap: largest allowed group, the oversampling factor S by default
    :param enforce_cap: skip candidates with a group above the cap
    :param compare_swap: in random-sample mode, also run the swap heuristic and keep the better of the two
    """
    mode: str = constants.SEARCH_EXHAUSTIVE
    count: int = None
    seed: int = None
    dof_mode: str = constants.DOF_OPTIMIZED
    group_size_cap: int = None
    enforce_cap: bool = True
    compare_swap: bool = True

    def __post_init__(self):
        if self.mode not in constants.SEARCH_MODES:
            raise DomainException("unknown search mode '%s'" % self.mode)
        if self.count is not None and self.count < 1:
            raise DomainException("random-sample search needs at least one candidate (got %r)" % self.count)
        if self.dof_mode not in (constants.DOF_UNIFORM, constants.DOF_OPTIMIZED, constants.DOF_TRACE):
            raise DomainException("unknown DoF mode '%s'" % self.dof_mode)
        if self.group_size_cap is not None and self.group_size_cap < 1:
            raise DomainException("group size cap must be positive (got %r)" % self.group_size_cap)

    @classmethod
    def parse(cls, text, **kwargs):
        """
        Build from 'exhaustive', 'swap-heuristic', 'random-sample' or 'random-sample:<count>'.
        """
        mode, _, count = text.partition(':')
        if count:
            if mode != constants.SEARCH_RANDOM_SAMPLE:
                raise DomainException("only random-sample takes a candidate count (got '%s')" % text)
            try:
                kwargs['count'] = int(count)
            except ValueError:
                raise DomainException("bad candidate count in '%s'" % text)
        return cls(mode=mode, **kwargs)

    def cap(self, S):
        if not self.enforce_cap:
            return None
        return self.group_size_cap if self.group_size_cap is not None else S


@dataclass(frozen=True)
class Prepartition:
    """
    One seed link per group and the links left to assign.
    """
    seeds: tuple
    remaining: tuple

    @property
    def G(self):
        return len(self.seeds)

    @property
    def L(self):
        return len(self.seeds) + len(self.remaining)

    @property
    def search_space_size(self):
        return self.G ** len(self.remaining)

    def groups_for(self, code):
        """
        Groups of the candidate assigning remaining[i] to group code[i].
        """
        groups = [[s] for s in self.seeds]
        for link, k in zip(self.remaining, code):
            groups[k].append(link)
        return groups


def variance_objective(partition, dopplers):
    """
    Sum over groups of the squared deviations of the Doppler shifts from the group mean.

    :param partition: Partition or an iterable of groups of positions
    :param dopplers: Doppler shift per link position
    """
    groups = partition.groups if isinstance(partition, Partition) else partition
    f = np.asarray(dopplers, dtype=float)
    total = 0.0
    for g in groups:
        values = f[list(g)]
        total += float(np.sum((values - values.mean()) ** 2))
    return total


def _initial_order(L, init, seed):
    if init == constants.INIT_ROUND_ROBIN:
        return np.arange(L)
    if init == constants.INIT_RANDOM:
        return np.random.default_rng(seed).permutation(L)
    raise DomainException("unknown initial assignment '%s'" % init)


def _deal(order, G):
    labels = np.empty(len(order), dtype=int)
    labels[order] = np.arange(len(order)) % G
    return labels


def _groups_from_labels(labels, G):
    return tuple(tuple(int(i) for i in np.flatnonzero(labels == k)) for k in range(G))


def duplicate_classes(dopplers, G, spread=None, tolerance=None):
    """
    Label the links whose Doppler shifts must end up in distinct groups.

    Shifts within tolerance (Hz) of each other form a class. Classes larger than G cannot
    be spread and stay unlabelled. The positions in spread form a class of their own.

    :returns: int array, the class of each position or -1
    """
    f = np.asarray(dopplers, dtype=float)
    if tolerance is None:
        tolerance = config.doppler_duplicate_tolerance
    classes = np.full(f.size, -1, dtype=int)
    next_class = 0
    if spread is not None and len(spread):
        spread = sorted(set(int(i) for i in spread))
        if len(spread) > G or spread[0] < 0 or spread[-1] >= f.size:
            raise DomainException("cannot spread positions %s over %d groups of %d links" % (spread, G, f.size))
        classes[spread] = next_class
        next_class += 1
    order = np.argsort(f, kind='stable')
    free = order[classes[order] < 0]
    for run in np.split(free, np.flatnonzero(np.diff(f[free]) > tolerance) + 1):
        if len(run) < 2:
            continue
        if len(run) > G:
            log.warning("%d links share a Doppler shift near %.6g Hz, more than the %d groups", len(run),
                        f[run[0]], G)
            continue
        classes[np.sort(run)] = next_class
        next_class += 1
    return classes


def _spread_out(labels, classes):
    return all(len(set(labels[classes == c])) == np.count_nonzero(classes == c) for c in set(classes[classes >= 0]))


def _class_blocks(order, classes):
    """
    The order with the members of every class moved next to the first one met.
    """
    blocks = []
    seen = set()
    for i in order:
        c = classes[i]
        if c < 0:
            blocks.append(i)
        elif c not in seen:
            seen.add(c)
            blocks.extend(j for j in order if classes[j] == c)
    return np.array(blocks, dtype=int)


def _allowed_swaps(i, labels, classes, held):
    """
    Links j whose swap with i leaves no two members of a class in one group.
    """
    a = labels[i]
    ci = classes[i]
    allowed = np.ones(labels.size, dtype=bool)
    if ci >= 0:
        allowed &= held[labels, ci] - (classes == ci) == 0
    constrained = classes >= 0
    cj = np.where(constrained, classes, 0)
    allowed &= ~constrained | (held[a, cj] - (cj == ci) == 0)
    return allowed


def anticluster(dopplers, G, seed=None, init=constants.INIT_ROUND_ROBIN, single_pass=False, spread=None,
                tolerance=None):
    """
    Balanced Doppler anticlustering by best-improvement swaps.

    The links start in a balanced assignment (round-robin over positions, or a seeded random one).
    Each link in turn is swapped with the link of another group giving the largest increase of
    variance_objective, if any. Passes over all links repeat until one makes no swap, or stop
    after the first pass when single_pass is set. Swaps keep the group sizes.

    Links with equal Doppler shifts (see :func:`duplicate_classes`) are dealt to distinct groups
    and no swap brings two of them together.

    :param dopplers: Doppler shift (Hz) per link position
    :param G: number of groups, at most the number of links
    :param spread: positions to place one per group, such as the sink-plane links
    :param tolerance: largest difference (Hz) between equal shifts, config.doppler_duplicate_tolerance by default
    :returns: Partition with the objective history
    """
    f = np.asarray(dopplers, dtype=float)
    L = f.size
    if not 1 <= G <= L:
        raise DomainException("cannot split %d links into %d groups" % (L, G))
    classes = duplicate_classes(f, G, spread=spread, tolerance=tolerance)
    order = _initial_order(L, init, seed)
    labels = _deal(order, G)
    if not _spread_out(labels, classes):
        labels = _deal(_class_blocks(order, classes), G)
    held = np.zeros((G, max(int(classes.max()) + 1, 1)), dtype=int)
    np.add.at(held, (labels[classes >= 0], classes[classes >= 0]), 1)
    counts = np.bincount(labels, minlength=G).astype(float)
    sums = np.bincount(labels, weights=f, minlength=G)
    history = [variance_objective(_groups_from_labels(labels, G), f)]
    threshold = 1e-12 * max(float(np.sum((f - f.mean()) ** 2)), np.finfo(float).tiny)

    swapped = True
    while swapped:
        swapped = False
        for i in range(L):
            a = labels[i]
            moved_a = sums[a] - f[i] + f
            moved_b = sums[labels] - f + f[i]
            gain = -(moved_a ** 2 - sums[a] ** 2) / counts[a] \
                - (moved_b ** 2 - sums[labels] ** 2) / counts[labels]
            gain[labels == a] = -np.inf
            gain[~_allowed_swaps(i, labels, classes, held)] = -np.inf
            j = int(np.argmax(gain))
            if gain[j] > threshold:
                b = labels[j]
                sums[a] += f[j] - f[i]
                sums[b] += f[i] - f[j]
                for k, source, target in ((i, a, b), (j, b, a)):
                    if classes[k] >= 0:
                        held[source, classes[k]] -= 1
                        held[target, classes[k]] += 1
                labels[i], labels[j] = b, a
                history.append(variance_objective(_groups_from_labels(labels, G), f))
                log.debug("swap %d <-> %d: objective %.6g", i, j, history[-1])
                swapped = True
        if single_pass:
            break

    log.info("anticlustering of %d links in %d groups: objective %.6g after %d swaps", L, G, history[-1],
             len(history) - 1)
    return Partition(groups=_groups_from_labels(labels, G), mode='anticluster', objective_history=tuple(history))


def sink_plane_positions(links, sink):
    """
    Positions of the links whose transmitter shares the sink's orbital plane.
    """
    return tuple(i for i, link in enumerate(links) if link.sat is not None and link.sat.p == sink.p)


def default_group_count(links, sink):
    return len(sink_plane_positions(links, sink))


def prepartition(links, sink_plane_members):
    """
    Seed one group per sink-plane link.

    :param links: all links, by position
    :param sink_plane_members: positions (ints) or satellites (SatIndex) of the sink-plane links
    :raises PrepartitionException: when there is no sink-plane link
    """
    members = set(sink_plane_members)
    seeds = tuple(i for i, link in enumerate(links) if i in members or link.sat in members)
    if not seeds:
        raise PrepartitionException("no link in the sink's orbital plane; give the number of groups explicitly")
    remaining = tuple(i for i in range(len(links)) if i not in seeds)
    prep = Prepartition(seeds=seeds, remaining=remaining)
    log.info("prepartition: G=%d seeds, %d links to assign, %d candidates", prep.G, len(remaining),
             prep.search_space_size)
    return prep


def search_space_size(prep):
    return prep.search_space_size


def estimate_cost(prep, cfg):
    """
    Number of candidate evaluations a search will make (one pass for the swap heuristic).
    """
    if cfg.mode == constants.SEARCH_EXHAUSTIVE:
        return prep.search_space_size
    if cfg.mode == constants.SEARCH_RANDOM_SAMPLE:
        count = cfg.count if cfg.count is not None else config.sample_count
        return count + _swap_pass_cost(prep) if cfg.compare_swap else count
    return _swap_pass_cost(prep)


def _swap_pass_cost(prep):
    return 1 + len(prep.remaining) * max(prep.G - 1, 0)


@dataclass
class _SearchContext:
    prep: Prepartition
    full: object
    sigma2: float
    dof_mode: str
    cap: int = None

    def score(self, code):
        """
        (fairness, C_sum, canonical groups) of a candidate, None when it breaks the size cap.
        """
        groups = self.prep.groups_for(code)
        if self.cap is not None and any(len(g) > self.cap for g in groups):
            return None
        channels, dof = allocate([self.full.subset(g) for g in groups], self.dof_mode)
        report = individual_rates(channels, self.sigma2, dof)
        return report.fairness, report.C_sum, tuple(sorted(tuple(sorted(g)) for g in groups))


def _better(candidate, incumbent):
    if incumbent is None:
        return candidate is not None
    if candidate is None:
        return False
    if candidate[0] != incumbent[0]:
        return candidate[0] > incumbent[0]
    if candidate[1] != incumbent[1]:
        return candidate[1] > incumbent[1]
    return candidate[2] < incumbent[2]



def _fairness_of(scored):
    return "n/a" if scored is None else "%.6f" % scored[0]


_worker_context = None


def _init_worker(context):
    global _worker_context
    _worker_context = context


def _best_of_chunk(codes, context=None):
    if context is None:
        context = _worker_context
    best = None
    for code in codes:
        scored = context.score(tuple(int(k) for k in code))
        if _better(scored, best):
            best = scored
    return best


def _chunks(codes, size):
    iterator = iter(codes)
    while True:
        chunk = list(itertools.islice(iterator, size))
        if not chunk:
            return
        yield chunk


def _reduce(context, codes, workers):
    best = None
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(context,)) as pool:
            for scored in pool.map(_best_of_chunk, _chunks(codes, config.search_chunk)):
                if _better(scored, best):
                    best = scored
    else:
        for chunk in _chunks(codes, config.search_chunk):
            scored = _best_of_chunk(chunk, context)
            if _better(scored, best):
                best = scored
    return best


def _swap_search(context):
    prep = context.prep
    code = [i % prep.G for i in range(len(prep.remaining))]
    best = context.score(tuple(code))
    improved = True
    while improved:
        improved = False
        move = None
        for i, k in itertools.product(range(len(code)), range(prep.G)):
            if k == code[i]:
                continue
            trial = list(code)
            trial[i] = k
            scored = context.score(tuple(trial))
            if _better(scored, best):
                best, move = scored, (i, k)
        if move is not None:
            code[move[0]] = move[1]
            improved = True
            log.debug("swap heuristic: link %d to group %d, fairness %.6f", prep.remaining[move[0]], move[1],
                      best[0])
    return best


def max_fairness_search(prep, links, pm, sigma2, cfg=None, allow_large=False, workers=None):
    """
    Assignment of the remaining links maximizing the Jain fairness of the rates.

    Candidates are ranked by fairness, then by sum capacity, then by the smaller canonical
    encoding, so the result does not depend on the evaluation order or the number of workers.

    :param prep: Prepartition of the links
    :param links: all links, by position
    :param cfg: SearchConfig, exhaustive with optimized DoF by default
    :param allow_large: run exhaustive searches above config.max_exhaustive_candidates
    :param workers: number of processes, config.workers by default
    :returns: (Partition, RateReport)
    :raises SearchAbortedException: when an exhaustive search is too large and not allowed
    :raises EmptyCandidateSetException: when no candidate respects the group size cap
    """
    if cfg is None:
        cfg = SearchConfig()
    if workers is None:
        workers = config.workers
    if prep.L != len(links):
        raise DomainException("prepartition of %d links used with %d links" % (prep.L, len(links)))
    full = group_channel(pm, links, 1.0)
    context = _SearchContext(prep=prep, full=full, sigma2=sigma2, dof_mode=cfg.dof_mode, cap=cfg.cap(pm.S))
    R = len(prep.remaining)
    cost = estimate_cost(prep, cfg)

    mode = cfg.mode
    if cfg.mode == constants.SEARCH_EXHAUSTIVE:
        if cost > config.max_exhaustive_candidates and not allow_large:
            raise SearchAbortedException("exhaustive search over %d candidates exceeds the limit of %d"
                                         % (cost, config.max_exhaustive_candidates))
        log.info("exhaustive search over %d candidates with %d worker(s)", cost, workers)
        best = _reduce(context, itertools.product(range(prep.G), repeat=R), workers)
    elif cfg.mode == constants.SEARCH_RANDOM_SAMPLE:
        count = cfg.count if cfg.count is not None else config.sample_count
        codes = np.random.default_rng(cfg.seed).integers(0, prep.G, size=(count, R))
        log.info("random-sample search over %d of %d candidates with %d worker(s)", count,
                 prep.search_space_size, workers)
        best = _reduce(context, codes, workers)
        if cfg.compare_swap:
            swapped = _swap_search(context)
            log.info("random-sample fairness %s, swap heuristic fairness %s", _fairness_of(best),
                     _fairness_of(swapped))
            if _better(swapped, best):
                best, mode = swapped, constants.SEARCH_SWAP_HEURISTIC
    else:
        best = _swap_search(context)

    if best is None:
        raise EmptyCandidateSetException("no candidate partition respects the group size cap of %r" % context.cap)
    partition = Partition(groups=best[2], mode="max-fairness:%s" % mode)
    report = evaluate_partition(partition, links, pm, sigma2, cfg.dof_mode, full=full)
    partition.dof = report.dof
    log.info("best partition %s: fairness %.6f, C_sum %.6f", partition, report.fairness, report.C_sum)
    return partition, report


def evaluate_partition(partition, links, pm, sigma2, dof_mode=constants.DOF_OPTIMIZED, full=None):
    """
    Rates of a partition with DoF fractions set by dof_mode.

    Groups whose members have colliding Doppler shifts are reported in the warnings.

    :param full: channel of all links with rho = 1, built from links when not given
    :returns: RateReport
    """
    partition.validate(len(links))
    if full is None:
        full = group_channel(pm, links, 1.0)
    channels, dof = allocate([full.subset(g) for g in partition.groups], dof_mode)
    report = individual_rates(channels, sigma2, dof)
    warnings = []
    for k, gc in enumerate(channels):
        if gc.L > 1 and min_separation(gc.nus) <= config.nu_collision_tolerance:
            warnings.append("group %d %s has colliding Doppler shifts" % (k, list(gc.members)))
            log.warning("group %d %s has colliding Doppler shifts; its channel is rank deficient", k,
                        list(gc.members))
    report.warnings = tuple(warnings)
    return report

