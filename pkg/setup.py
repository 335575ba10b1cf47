"""setup.py
locan installation: pip install -e .[tests]

python setup.py sdist
twine upload --repository pypitest dist/coqe-x.x.x.tar.gz
twine upload --repository pypi dist/coqe-x.x.x.tar.gz
"""
from setuptools import setup, find_packages
from coqe.version import __version__ as version

try:
    with open('README.md', 'r') as f:
        long_description = f.read()
except IOError:
    long_description = ''

install_requires = [
    'colorlog',
    'msgpack',
    'setproctitle',
    'pyyaml',
    'sympy',
    'numpy',
]

setup(
    name='coqe',
    packages=find_packages(exclude=['tests']),
    package_data={'coqe': ['manifests/*.yaml']},
    version=version,
    description=(
        'Symbolic verification of comprehensive quasi-Einstein manifolds'),
    long_description=long_description,
    long_description_content_type='text/markdown',
    keywords=['differential geometry', 'tensor', 'quasi-einstein', 'sympy'],
    install_requires=install_requires,
    extras_require={'tests': ['pytest', 'hypothesis']},
    entry_points={'console_scripts': ['coqe = coqe.cli:main']},
    classifiers=[
        'Intended Audience :: Science/Research',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Programming Language :: Python :: 3 :: Only',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
    ],
)
