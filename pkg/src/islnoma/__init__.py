"""
Inter-plane intersatellite links in Walker Delta constellations: feasibility,
Doppler-aware MMSE-SIC multiple access capacity and hybrid NOMA-OMA grouping.
"""

__author__ = 'islnoma'
__version__ = '0.1.0dev0'

import logging
import pyconfig

log = logging.getLogger('islnoma')


class Config(object):
    """
    This class holds a set of configuration parameters (using pyconfig) for pyISLNoma:

    :param reference_power: Reference power (W) dividing received powers and noise variances. 1 W by default.
    :param timeline_dt: Default scan step (s) for feasibility timelines.
    :param edge_tolerance: Resolution (s) of the bisection refining window edges.
    :param timeline_chunk: Number of epochs evaluated per vectorized block when scanning a timeline.
    :param rank_tolerance: Relative singular value threshold (times the largest one) for rank decisions.
    :param nu_collision_tolerance: Wrap-around distance below which two normalized Doppler shifts collide.
    :param doppler_duplicate_tolerance: Doppler shifts (Hz) closer than this are equal for anticlustering.
    :param beam_tolerance: Slack on the cosine comparison of the beam condition.
    :param max_exhaustive_candidates: Exhaustive partition searches above this size need an explicit override.
    :param sample_count: Default number of candidates drawn by the random-sample search.
    :param workers: Number of processes evaluating candidate partitions. 1 evaluates in-process.
    :param search_chunk: Number of candidates handed to a worker at a time.

    Refer to the pyconfig documentation for information on how to override these in your own project.
    """
    reference_power = pyconfig.setting("islnoma.reference_power", 1.0)
    timeline_dt = pyconfig.setting("islnoma.timeline_dt", 0.05)
    edge_tolerance = pyconfig.setting("islnoma.edge_tolerance", 1e-3)
    timeline_chunk = pyconfig.setting("islnoma.timeline_chunk", 2048)
    rank_tolerance = pyconfig.setting("islnoma.rank_tolerance", 1e-10)
    nu_collision_tolerance = pyconfig.setting("islnoma.nu_collision_tolerance", 1e-9)
    doppler_duplicate_tolerance = pyconfig.setting("islnoma.doppler_duplicate_tolerance", 1.0)
    beam_tolerance = pyconfig.setting("islnoma.beam_tolerance", 1e-12)
    max_exhaustive_candidates = pyconfig.setting("islnoma.max_exhaustive_candidates", 10 ** 7)
    sample_count = pyconfig.setting("islnoma.sample_count", 10 ** 6)
    workers = pyconfig.setting("islnoma.workers", 1)
    search_chunk = pyconfig.setting("islnoma.search_chunk", 4096)


config = Config()

from islnoma.exceptions import ISLException  # noqa: E402
from islnoma.orbit import WalkerConfig, SatIndex, EcefState, ecef_position, ecef_velocity, distance, \
    radial_speed, doppler_shift  # noqa: E402
from islnoma.feasibility import LinkBudget, FeasibilityWindow, WindowStats, feasible_set, \
    feasibility_timeline, window_stats, find_epoch  # noqa: E402
from islnoma.channel import PulseModel, LinkParams, GroupChannel, build_pulse, group_channel, build_links, \
    noise_variance  # noqa: E402
from islnoma.receiver import SicTrace, SymbolFrame, mmse_filter, sinr_per_stream, sic_detect  # noqa: E402
from islnoma.capacity import RateReport, DofAllocation, group_rate, sum_capacity, noma_capacity, \
    oma_capacity, fairness  # noqa: E402
from islnoma.partition import Partition, SearchConfig, anticluster, prepartition, max_fairness_search, \
    evaluate_partition  # noqa: E402
