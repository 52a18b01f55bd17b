__author__ = 'islnoma'

import csv
import json
import logging
import math
import os
import re

from cryptography.hazmat.backends import default_backend
from cryptography.hazmat.primitives import hashes

from islnoma import constants
from islnoma.exceptions import ConfigException

log = logging.getLogger('islnoma.utils')

HASH_HEADER = '# scenario-sha256: '

_POWER_RE = re.compile(r'^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)?\s*$')


def db_to_linear(x):
    return 10.0 ** (x / 10.0)


def linear_to_db(x):
    if not x > 0:
        raise ConfigException("cannot express %r in dB" % x)
    return 10.0 * math.log10(x)


def watt_to_dbm(p):
    return linear_to_db(p) + 30.0


def dbm_to_watt(p):
    return db_to_linear(p - 30.0)


def parse_power(value):
    """
    Power in W from a number (W) or a string with a unit suffix, e.g. "10 W" or "-120 dBm".

    :param value: number or string
    :returns: float (W)
    """
    if isinstance(value, bool):
        raise ConfigException("not a power: %r" % value)
    if isinstance(value, (int, float)):
        if not value > 0:
            raise ConfigException("power must be positive (got %r)" % value)
        return float(value)
    m = _POWER_RE.match(str(value))
    if m is None:
        raise ConfigException("cannot parse power '%s'" % value)
    magnitude = float(m.group(1))
    scale, logarithmic = constants.power_unit(m.group(2) or 'W')
    if logarithmic:
        return scale * db_to_linear(magnitude)
    if not magnitude > 0:
        raise ConfigException("power must be positive (got '%s')" % value)
    return scale * magnitude


def unicode_to_bytes(u):
    if isinstance(u, bytes):
        return u
    return u.encode('utf-8')


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def digest(data, hash_alg='SHA256'):
    """
    Calculate a hash digest of algorithm hash_alg and return it hex encoded.

    :param hash_alg: String with algorithm, such as 'SHA256' (as named by pyca/cryptography)
    :param data: The data to digest, str or bytes
    :returns: hex string
    """
    h = getattr(hashes, hash_alg)
    d = hashes.Hash(h(), backend=default_backend())
    d.update(unicode_to_bytes(data))
    return d.finalize().hex()


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path, header, rows, scenario_hash=None):
    """
    Write a CSV table, preceded by the scenario hash comment when one is given.

    Floats are written with repr() so identical inputs give byte-identical files.
    """
    with open(path, 'w', newline='') as fd:
        if scenario_hash is not None:
            fd.write(HASH_HEADER + scenario_hash + '\n')
        writer = csv.writer(fd, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    log.debug("wrote %s", path)
    return path


def read_csv(path):
    """
    Rows of a CSV written by write_csv, hash comment skipped.

    :returns: (scenario hash or None, header, rows)
    """
    with open(path, newline='') as fd:
        lines = fd.read().splitlines()
    scenario_hash = None
    if lines and lines[0].startswith(HASH_HEADER):
        scenario_hash = lines.pop(0)[len(HASH_HEADER):]
    rows = list(csv.reader(lines))
    return scenario_hash, rows[0], rows[1:]


def write_json(path, obj, scenario_hash=None):
    if scenario_hash is not None:
        obj = dict(obj, scenario_sha256=scenario_hash)
    with open(path, 'w') as fd:
        json.dump(obj, fd, indent=2, sort_keys=True)
        fd.write('\n')
    log.debug("wrote %s", path)
    return path


def ensure_dir(path):
    if not os.path.isdir(path):
        os.makedirs(path)
    return path
