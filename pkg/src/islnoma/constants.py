from islnoma.exceptions import ConfigException

SPEED_OF_LIGHT_KM_S = 2.99792458e5
SPEED_OF_LIGHT_M_S = 2.99792458e8
BOLTZMANN = 1.380649e-23

EARTH_RADIUS_KM = 6378.0
REVOLUTION_PERIOD_S = 91.0 * 60.0
NOISE_REFERENCE_TEMPERATURE_K = 290.0

PULSE_TRIANGULAR = 'triangular'
PULSE_RAISED_COSINE = 'raised-cosine'
PULSE_SHAPES = (PULSE_TRIANGULAR, PULSE_RAISED_COSINE)

ALPHABET_QPSK = 'QPSK'
ALPHABET_QAM16 = '16-QAM'
ALPHABET_GAUSSIAN = 'Gaussian'

DETECT_SLICER = 'slicer'
DETECT_GENIE = 'genie'
FORM_DECOMPOSED = 'decomposed'
FORM_DIRECT = 'direct'

DOF_UNIFORM = 'uniform'
DOF_OPTIMIZED = 'optimized'
DOF_TRACE = 'trace'

SEARCH_EXHAUSTIVE = 'exhaustive'
SEARCH_RANDOM_SAMPLE = 'random-sample'
SEARCH_SWAP_HEURISTIC = 'swap-heuristic'
SEARCH_MODES = (SEARCH_EXHAUSTIVE, SEARCH_RANDOM_SAMPLE, SEARCH_SWAP_HEURISTIC)

INIT_ROUND_ROBIN = 'round-robin'
INIT_RANDOM = 'random'

BEAM_AT_SINK = 'sink'
BEAM_AT_BOTH = 'both'
BEAM_ENDS = (BEAM_AT_SINK, BEAM_AT_BOTH)

NOISE_SYMBOL_RATE = 'symbol-rate'
NOISE_DENSITY = 'density'
NOISE_CONVENTIONS = (NOISE_SYMBOL_RATE, NOISE_DENSITY)

SCHEME_PURE_NOMA = 'pure-NOMA'
SCHEME_OMA_OPT = 'pure-OMA-opt'
SCHEME_OMA_UNI = 'pure-OMA-uni'
SCHEME_ALG1_OPT = 'alg1-opt'
SCHEME_ALG1_UNI = 'alg1-uni'
SCHEME_ALG2_OPT = 'alg2-opt'
SCHEME_ALG2_UNI = 'alg2-uni'

# scheme -> (grouping, dof mode)
SCHEMES = {
    SCHEME_PURE_NOMA: ('noma', DOF_UNIFORM),
    SCHEME_OMA_OPT: ('oma', DOF_OPTIMIZED),
    SCHEME_OMA_UNI: ('oma', DOF_UNIFORM),
    SCHEME_ALG1_OPT: ('anticluster', DOF_OPTIMIZED),
    SCHEME_ALG1_UNI: ('anticluster', DOF_UNIFORM),
    SCHEME_ALG2_OPT: ('max-fairness', DOF_OPTIMIZED),
    SCHEME_ALG2_UNI: ('max-fairness', DOF_UNIFORM),
}

SCHEME_ALIASES = {
    'pure-OMA(opt)': SCHEME_OMA_OPT,
    'pure-OMA(uni)': SCHEME_OMA_UNI,
    'alg1(opt)': SCHEME_ALG1_OPT,
    'alg1(uni)': SCHEME_ALG1_UNI,
    'alg2(opt)': SCHEME_ALG2_OPT,
    'alg2(uni)': SCHEME_ALG2_UNI,
    'noma': SCHEME_PURE_NOMA,
}

# power unit suffix -> (scale, logarithmic)
POWER_UNITS = {
    'W': (1.0, False),
    'mW': (1e-3, False),
    'dBW': (1.0, True),
    'dBm': (1e-3, True),
}


def _try_a_to_b(dic, item, what='value'):
    try:
        return dic[item]
    except KeyError:
        raise ConfigException("Unsupported {} '{}'.".format(what, item))


def scheme_name(name):
    """
    Resolve a scheme name or one of its aliases to the canonical name.
    """
    name = SCHEME_ALIASES.get(name, name)
    _try_a_to_b(SCHEMES, name, 'scheme')
    return name


def scheme_spec(name):
    return _try_a_to_b(SCHEMES, scheme_name(name), 'scheme')


def power_unit(suffix):
    return _try_a_to_b(POWER_UNITS, suffix, 'power unit')
