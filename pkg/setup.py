#!/usr/bin/env python

import os.path
import re

from setuptools import setup, find_packages


def read(name):
    with open(os.path.join(os.path.dirname(__file__), name)) as f:
        return f.read()


version = re.search(r"^__version__ = '([^']+)'", read('soilqr/__init__.py'), re.M).group(1)


setup(
    name="django-soilqr",
    version=version,
    license='BSD',
    description="Quantile regression mapping of soil properties, as a Django application",
    long_description=read('README.rst'),
    packages=find_packages('.', exclude=['test_proj', 'test_proj.*']),
    python_requires='>=3.9',
    install_requires=[
        'Django>=4.2',
        'numpy>=1.22',
        'scipy>=1.9',
        'pandas>=1.5',
        'joblib>=1.2',
        'PyYAML>=6.0',
    ],
    entry_points={
        'console_scripts': ['soilqr=soilqr.cli:main'],
    },
    test_suite='test_proj.runtests.main',
    classifiers=[
        'Intended Audience :: Science/Research',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Operating System :: OS Independent',
        'Framework :: Django',
        'Topic :: Scientific/Engineering :: GIS',
    ],
)
