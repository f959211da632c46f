# -*- coding: utf-8 -*-
from setuptools import setup

setup(
    name='wtv1d',
    version='0.1.1',
    author='wtv1d developers',
    packages=['wtv1d', 'wtv1d.test', 'wtv1d.test.unit',
              'wtv1d.test.integration'],
    package_data={'wtv1d.test': ['data/*.csv', 'data/*.json']},
    license='Apache License 2.0',
    description='Weighted total variation and weighted fidelity denoising '
                'of one-dimensional signals, with certificates and closed '
                'forms.',
    long_description=open('README.rst').read(),
    python_requires='>=3.7',
    install_requires=[
        'numpy>=1.17', 'requests', 'pandas', 'pyjstat', 'matplotlib', 'joblib'
    ],
    tests_require=['pytest', 'hypothesis'],
    extras_require={'dev': ['pytest', 'hypothesis']},
    entry_points={'console_scripts': ['wtv1d=wtv1d.cli:main']},
    test_suite='wtv1d.test',
    keywords=['total variation', 'denoising', 'taut string', 'duality',
              'json-stat'],
    classifiers=[
        'Development Status :: 4 - Beta',
        'Environment :: Console',
        'Intended Audience :: Developers',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: MacOS :: MacOS X',
        'Operating System :: Microsoft :: Windows',
        'Operating System :: POSIX',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Software Development :: Libraries'
        ],
)
