# -*- coding: utf-8 -*-

# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="hardy",
    version="1.0.0",
    author="Mattias Rönnblom",
    author_email="mattias.ronnblom@ericsson.com",
    description="Separable solutions of Hardy-potential elliptic equations "
    "on the half-space",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["test"]),
    scripts=['app/hardy'],
    install_requires=['numpy', 'scipy', 'pyyaml'],
    extras_require={'test': ['pytest', 'flake8']},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Operating System :: Linux",
    ],
    python_requires='>=3.8'
)
