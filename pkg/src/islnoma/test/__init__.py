import os
import shutil
import tempfile
import logging
import unittest

import numpy as np

__author__ = 'islnoma'

from islnoma.channel import LinkParams, group_channel

FULL_TESTS = 'ISLNOMA_FULL_TESTS'


def full_tests_enabled():
    return bool(os.environ.get(FULL_TESTS))


full_scale = unittest.skipIf(not full_tests_enabled(), "set %s to run the full constellation tests" % FULL_TESTS)


def random_links(rng, L, power=(0.5, 2.0), nus=None):
    """
    L links with random phases, |A|^2 uniform in power and normalized Doppler shifts nus (random by default).
    """
    if nus is None:
        nus = rng.uniform(0.0, 1.0, size=L)
    gains = rng.uniform(power[0], power[1], size=L)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=L)
    return [LinkParams(A=complex(np.sqrt(g) * np.exp(1j * ph)), f=0.0, nu=float(nu), index=i + 1)
            for i, (g, ph, nu) in enumerate(zip(gains, phases, nus))]


def random_group(rng, pm, L, rho=1.0, **kwargs):
    return group_channel(pm, random_links(rng, L, **kwargs), rho)


def random_matrix(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def relative_error(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class TempDirTestCase(unittest.TestCase):
    """
    Test case with a scratch directory removed after each test.
    """

    def setUp(self):
        self.tmp = tempfile.mkdtemp(prefix='islnoma-')
        self.addCleanup(shutil.rmtree, self.tmp, True)
        logging.debug("scratch directory %s", self.tmp)

    def path(self, *parts):
        return os.path.join(self.tmp, *parts)
