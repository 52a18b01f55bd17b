#!/usr/bin/env python3
from setuptools import setup, find_packages
import os

here = os.path.abspath(os.path.dirname(__file__))
README = open(os.path.join(here, 'README.rst'), 'rb').read().decode('utf-8')
NEWS = open(os.path.join(here, 'NEWS.txt'), 'rb').read().decode('utf-8')


version = '0.1.0dev0'

install_requires = [
    'numpy>=1.22', 'scipy>=1.8', 'pyconfig', 'cryptography'
]

setup(name='pyISLNoma',
    version=version,
    description="Inter-plane ISL feasibility and hybrid NOMA-OMA capacity for Walker Delta constellations",
    long_description=README + '\n\n' + NEWS,
    classifiers=[
      # Get strings from http://pypi.python.org/pypi?%3Aaction=list_classifiers
      'Programming Language :: Python :: 3',
      'Topic :: Scientific/Engineering',
    ],
    keywords='leo satellite isl walker-delta noma sic mmse doppler',
    author='islnoma',
    license='BSD',
    packages=find_packages('src'),
    python_requires='>=3.8',
    tests_require=['pytest'],
    package_dir={'': 'src'},
    include_package_data=True,
    package_data={
        'islnoma.test': ['data/scenarios/*.json'],
    },
    zip_safe=False,
    install_requires=install_requires,
    extras_require={'test': ['pytest']},
    entry_points={
          'console_scripts': ['islsim=islnoma.tools:main']
    },
)
