# SPDX-License-Identifier: MIT
"""Boosted-order weak approximation of Markov semigroups on random grids."""

from semiboost._core import *  # noqa: F401,F403
