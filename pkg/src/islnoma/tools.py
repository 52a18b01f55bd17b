"""
islsim - pyISLNoma command line tool
Usage: islsim <feasibility|doppler|compare|partition>
       [-h|--help]
       [--version]
       -s|--scenario <scenario.json>
       [-o|--out <output directory>]
       [--epoch <seconds>|auto-L=<n>]
       [--schemes <scheme>[,<scheme>...]]
       [--search-mode exhaustive|random-sample[:<count>]|swap-heuristic]
       [--seed <seed>]
       [--sweep-S <S>[,<S>...]]
       [--sweep-noise-figure <dB>[,<dB>...]]
       [--format csv|json]
       [--allow-exhaustive]
       [--workers <n>]
       [--loglevel <level>]
       [--logfile <file>]

Subcommands:
  feasibility  feasibility windows over the timeline horizon (timeline.csv, window_stats.csv)
  doppler      links and Doppler shifts at the study epoch (doppler.csv)
  compare      sum capacity and fairness of the grouping schemes (summary.csv, rates.csv)
  partition    Algorithm 1 and Algorithm 2 partitions (partitions.json, rates.csv)

Schemes: pure-NOMA, pure-OMA-opt, pure-OMA-uni, alg1-opt, alg1-uni, alg2-opt, alg2-uni

Exit status: 0 success, 1 other failure, 2 configuration error, 3 infeasible scenario,
4 search refused by the cost gate.
"""

__author__ = 'islnoma'

import getopt
import logging
import os
import sys
from dataclasses import replace

from islnoma import __version__, constants
from islnoma.channel import group_channel
from islnoma.exceptions import ConfigException, DomainException, InfeasibleScenarioException, ISLException, \
    PrepartitionException, SatIndexException, SearchAbortedException
from islnoma.feasibility import feasibility_timeline, received_power, window_stats
from islnoma.orbit import distance, sink_plane
from islnoma.partition import Partition, SearchConfig, anticluster, evaluate_partition, max_fairness_search, \
    prepartition, sink_plane_positions
from islnoma.scenario import load_scenario
from islnoma.utils import ensure_dir, watt_to_dbm, write_csv, write_json

log = logging.getLogger('islnoma.tools')

SUBCOMMANDS = ('feasibility', 'doppler', 'compare', 'partition')
DEFAULT_SCHEMES = (constants.SCHEME_PURE_NOMA, constants.SCHEME_OMA_OPT, constants.SCHEME_OMA_UNI,
                   constants.SCHEME_ALG1_OPT, constants.SCHEME_ALG1_UNI, constants.SCHEME_ALG2_OPT,
                   constants.SCHEME_ALG2_UNI)

SUMMARY_HEADER = ['scheme', 'G', 'C_sum', 'fairness']
RATES_HEADER = ['scheme', 'index', 'p', 'n', 'group', 'stage', 'rate']


def _members(sats):
    return ";".join(str(s) for s in sats)


def _timeline(scenario):
    return feasibility_timeline(scenario.walker, scenario.budget, scenario.sink, horizon=scenario.horizon_s,
                                dt=scenario.dt_s)


def run_feasibility(scenario, out, fmt='csv'):
    """
    Feasibility windows of the sink over the scenario horizon and their duration statistics per L.
    """
    timeline = _timeline(scenario)
    periodic = abs(scenario.horizon_s - scenario.walker.T_rev) < 1e-9
    stats = window_stats(timeline, periodic=periodic)
    scenario_hash = scenario.digest()
    if fmt == 'json':
        write_json(os.path.join(out, 'feasibility.json'), {
            'windows': [{'t_start': w.t_start, 't_end': w.t_end, 'L': w.L, 'members': [str(s) for s in w.members]}
                        for w in timeline],
            'stats': [dict(L=L, count=s.count, min=s.min, max=s.max, mean=s.mean, std=s.std)
                      for L, s in ((L, stats[L]) for L in stats.levels())],
        }, scenario_hash)
    else:
        write_csv(os.path.join(out, 'timeline.csv'), ['t_start', 't_end', 'L', 'members'],
                  [[w.t_start, w.t_end, w.L, _members(w.members)] for w in timeline], scenario_hash)
        write_csv(os.path.join(out, 'window_stats.csv'), ['L', 'count', 'min', 'max', 'mean', 'std'],
                  [[L, stats[L].count, stats[L].min, stats[L].max, stats[L].mean, stats[L].std]
                   for L in stats.levels()], scenario_hash)
    log.info("feasibility: %d windows, L levels %s", len(timeline), stats.levels())
    return timeline, stats


def run_doppler_table(scenario, out, fmt='csv'):
    """
    One row per feasible link at the study epoch, numbered as in the partitions.
    """
    t = scenario.resolve_epoch()
    pm = scenario.pulse()
    links = scenario.links(t, pm)
    intra = set(sink_plane(scenario.walker, scenario.sink, [link.sat for link in links]))
    rows = []
    for link in links:
        d = distance(scenario.walker, link.sat, scenario.sink, t)
        kind = 'intra' if link.sat in intra else 'inter'
        rows.append([link.index, link.sat.p, link.sat.n, kind, link.f, link.nu, d,
                     watt_to_dbm(received_power(scenario.budget, d))])
    header = ['index', 'p', 'n', 'plane', 'doppler_hz', 'nu', 'distance_km', 'received_dbm']
    if fmt == 'json':
        write_json(os.path.join(out, 'doppler.json'), {'epoch': t, 'links': [dict(zip(header, r)) for r in rows]},
                   scenario.digest())
    else:
        write_csv(os.path.join(out, 'doppler.csv'), header, rows, scenario.digest())
    log.info("doppler: %d links at t=%.6f s", len(links), t)
    return t, links


def evaluate_schemes(scenario, schemes, t, workers=None, allow_large=False):
    """
    Partition and rates of every scheme at epoch t.

    :returns: list of (scheme, Partition, RateReport) in the order of schemes
    """
    pm = scenario.pulse()
    sigma2 = scenario.sigma2()
    links = scenario.links(t, pm)
    full = group_channel(pm, links, 1.0)
    L = len(links)
    seeds = sink_plane_positions(links, scenario.sink)
    anticlustered = None
    results = []
    for name in schemes:
        grouping, dof_mode = constants.scheme_spec(name)
        if grouping == 'noma':
            partition = Partition(groups=(tuple(range(L)),), mode='noma')
        elif grouping == 'oma':
            partition = Partition(groups=tuple((i,) for i in range(L)), mode='oma')
        elif grouping == 'anticluster':
            if not seeds:
                raise PrepartitionException("no link in the sink's orbital plane to set the number of groups")
            if anticlustered is None:
                # the receiver only sees shifts modulo 1/T_c, so the folded shift is the one spread apart
                anticlustered = anticluster([link.nu / pm.T_c for link in links], len(seeds), spread=seeds)
            partition = replace(anticlustered)
        else:
            cfg = replace(scenario.search, dof_mode=dof_mode,
                          seed=scenario.search.seed if scenario.search.seed is not None else scenario.seed)
            partition, _ = max_fairness_search(prepartition(links, seeds), links, pm, sigma2, cfg,
                                               allow_large=allow_large, workers=workers)
        report = evaluate_partition(partition, links, pm, sigma2, dof_mode, full=full)
        partition.dof = report.dof
        log.info("%s: G=%d C_sum=%.4f fairness=%.4f", name, partition.G, report.C_sum, report.fairness)
        results.append((name, partition, report))
    return links, results


def _rate_rows(name, links, report):
    rows = []
    for link in links:
        rows.append([name, link.index, link.sat.p if link.sat else '', link.sat.n if link.sat else '',
                     report.group_of[link.index], report.stage_of[link.index],
                     report.per_satellite_rates[link.index]])
    return rows


def _write_results(scenario, out, suffix, links, results, fmt):
    scenario_hash = scenario.digest()
    if fmt == 'json':
        write_json(os.path.join(out, 'summary%s.json' % suffix), {
            'S': scenario.S,
            'noise_figure_db': scenario.noise_figure_db,
            'schemes': [dict(scheme=name, G=partition.G, partition=partition.to_json(), **report.to_json())
                        for name, partition, report in results],
        }, scenario_hash)
        return
    write_csv(os.path.join(out, 'summary%s.csv' % suffix), SUMMARY_HEADER,
              [[name, partition.G, report.C_sum, report.fairness] for name, partition, report in results],
              scenario_hash)
    rows = []
    for name, _, report in results:
        rows.extend(_rate_rows(name, links, report))
    write_csv(os.path.join(out, 'rates%s.csv' % suffix), RATES_HEADER, rows, scenario_hash)


def run_comparison(scenario, out, schemes=DEFAULT_SCHEMES, fmt='csv', sweep_S=None, sweep_noise_figure=None,
                   workers=None, allow_large=False):
    """
    Sum capacity and fairness of the schemes, once or for every (S, noise figure) point of a sweep.

    :returns: dict (S, noise figure) -> list of (scheme, Partition, RateReport)
    """
    schemes = [constants.scheme_name(s) for s in schemes]
    t = scenario.resolve_epoch()
    swept = bool(sweep_S or sweep_noise_figure)
    outcome = {}
    for S in (sweep_S or [scenario.S]):
        for F in (sweep_noise_figure or [scenario.noise_figure_db]):
            point = scenario.override(S=S, noise_figure_db=F, epoch=t)
            links, results = evaluate_schemes(point, schemes, t, workers=workers, allow_large=allow_large)
            suffix = "-S%d-F%g" % (S, F) if swept else ''
            _write_results(point, out, suffix, links, results, fmt)
            outcome[(S, F)] = results
    return outcome


def run_partition(scenario, out, fmt='csv', workers=None, allow_large=False):
    """
    Algorithm 1 and Algorithm 2 partitions with optimized DoF, with their rates.
    """
    t = scenario.resolve_epoch()
    point = scenario.override(epoch=t)
    schemes = [constants.SCHEME_ALG1_OPT, constants.SCHEME_ALG2_OPT]
    links, results = evaluate_schemes(point, schemes, t, workers=workers, allow_large=allow_large)
    scenario_hash = point.digest()
    write_json(os.path.join(out, 'partitions.json'),
               {'epoch': t, 'partitions': {name: partition.to_json() for name, partition, _ in results}},
               scenario_hash)
    if fmt == 'json':
        write_json(os.path.join(out, 'rates.json'), {name: report.to_json() for name, _, report in results},
                   scenario_hash)
    else:
        rows = []
        for name, _, report in results:
            rows.extend(_rate_rows(name, links, report))
        write_csv(os.path.join(out, 'rates.csv'), RATES_HEADER, rows, scenario_hash)
    return results


def _list(text, kind):
    try:
        return [kind(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ConfigException("bad list '%s'" % text)


def _epoch(text):
    try:
        return float(text)
    except ValueError:
        return text


def _search(scenario, text):
    cfg = SearchConfig.parse(text)
    section = dict(scenario.document.get('search', {}))
    section.pop('count', None)
    section['mode'] = cfg.mode
    if cfg.count is not None:
        section['count'] = cfg.count
    return section


def main(argv=None):
    """
    islsim command entrypoint
    """
    if argv is None:
        argv = sys.argv[1:]
    try:
        opts, args = getopt.gnu_getopt(argv, 'hs:o:',
                                       ['help',
                                        'version',
                                        'scenario=',
                                        'out=',
                                        'epoch=',
                                        'schemes=',
                                        'search-mode=',
                                        'seed=',
                                        'sweep-S=',
                                        'sweep-noise-figure=',
                                        'format=',
                                        'allow-exhaustive',
                                        'workers=',
                                        'loglevel=',
                                        'logfile='])
    except getopt.error as msg:
        print(msg)
        print(__doc__)
        return 2

    scenario_path = None
    out = '.'
    epoch = None
    schemes = DEFAULT_SCHEMES
    search_mode = None
    seed = None
    sweep_S = None
    sweep_F = None
    fmt = 'csv'
    allow_large = False
    workers = None
    loglevel = logging.WARN
    logfile = None
    try:
        for o, a in opts:
            if o in ('-h', '--help'):
                print(__doc__)
                return 0
            elif o == '--version':
                print("islsim version %s" % __version__)
                return 0
            elif o in ('-s', '--scenario'):
                scenario_path = a
            elif o in ('-o', '--out'):
                out = a
            elif o == '--epoch':
                epoch = _epoch(a)
            elif o == '--schemes':
                schemes = [constants.scheme_name(s) for s in _list(a, str)]
            elif o == '--search-mode':
                search_mode = a
            elif o == '--seed':
                seed = _list(a, int)[0]
            elif o == '--sweep-S':
                sweep_S = _list(a, int)
            elif o == '--sweep-noise-figure':
                sweep_F = _list(a, float)
            elif o == '--format':
                if a not in ('csv', 'json'):
                    raise ConfigException("unknown output format '%s'" % a)
                fmt = a
            elif o == '--allow-exhaustive':
                allow_large = True
            elif o == '--workers':
                workers = _list(a, int)[0]
            elif o == '--loglevel':
                loglevel = getattr(logging, a.upper(), None)
                if not isinstance(loglevel, int):
                    raise ConfigException('Invalid log level: %s' % a)
            elif o == '--logfile':
                logfile = a
    except (ConfigException, IndexError) as ex:
        print(ex)
        print(__doc__)
        return 2

    log_args = {'level': loglevel}
    if logfile is not None:
        log_args['filename'] = logfile
    logging.basicConfig(**log_args)

    if len(args) != 1 or args[0] not in SUBCOMMANDS:
        print("Missing or unknown subcommand")
        print(__doc__)
        return 2
    if scenario_path is None:
        print("Missing -s|--scenario argument")
        print(__doc__)
        return 2

    command = args[0]
    try:
        scenario = load_scenario(scenario_path)
        scenario = scenario.override(epoch=epoch, seed=seed,
                                     search=_search(scenario, search_mode) if search_mode else None)
        ensure_dir(out)
        if command == 'feasibility':
            run_feasibility(scenario, out, fmt)
        elif command == 'doppler':
            run_doppler_table(scenario, out, fmt)
        elif command == 'compare':
            run_comparison(scenario, out, schemes, fmt, sweep_S=sweep_S, sweep_noise_figure=sweep_F,
                           workers=workers, allow_large=allow_large)
        else:
            run_partition(scenario, out, fmt, workers=workers, allow_large=allow_large)
    except InfeasibleScenarioException as ex:
        log.error("%s", ex)
        return 3
    except SearchAbortedException as ex:
        log.error("%s; rerun with --allow-exhaustive or choose another --search-mode", ex)
        return 4
    except (ConfigException, DomainException, SatIndexException, PrepartitionException) as ex:
        log.error("%s", ex)
        return 2
    except ISLException as ex:
        log.error("%s", ex)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
