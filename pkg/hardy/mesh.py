# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

#
# Graded grids on [0, 1] and a vertex-centred finite-volume assembly
# for weighted operators -(σ(t)w')' with densities that are singular
# like t^a (1-t)^b at the endpoints.
#

import numpy as np

DEFAULT_DELTA = 1e-3
DEFAULT_RATIO = 1.01
DEFAULT_INNER = 0.1
DEFAULT_STEP = 0.002
DEFAULT_VERIFICATION_POINTS = 10000

GAUSS_ORDER = 3


def _geometric(start, stop, ratio):
    count = int(np.ceil(np.log(stop / start) / np.log(ratio)))
    return start * ratio ** np.arange(count)


def profile_grid(delta0=DEFAULT_DELTA, delta1=DEFAULT_DELTA,
                 ratio=DEFAULT_RATIO, inner=DEFAULT_INNER,
                 step=DEFAULT_STEP):
    """Geometric near both endpoints, uniform in the middle."""
    left = _geometric(delta0, inner, ratio)
    middle = np.linspace(inner, 1 - inner,
                         int(round((1 - 2 * inner) / step)) + 1)
    right = 1 - _geometric(delta1, inner, ratio)[::-1]
    return np.unique(np.concatenate([left, middle, right]))


def graded_nodes(count):
    """count+1 nodes with t = 2ξ² near 0, mirrored near 1."""
    xi = np.linspace(0, 1, count + 1)
    nodes = np.where(xi <= 0.5, 2 * xi ** 2, 1 - 2 * (1 - xi) ** 2)
    nodes[0] = 0.0
    nodes[-1] = 1.0
    return nodes


def cosine_nodes(count):
    xi = np.linspace(0, 1, count + 1)
    nodes = (1 - np.cos(np.pi * xi)) / 2
    nodes[0] = 0.0
    nodes[-1] = 1.0
    return nodes


def verification_grid(count=DEFAULT_VERIFICATION_POINTS):
    return graded_nodes(count + 1)[1:-1]


class FiniteVolume:
    """Dual cells are bounded by the midpoints between nodes; the two
    boundary nodes own half cells. A density is described as
    t^exponent_at_0 (1-t)^exponent_at_1 smooth(t)."""

    def __init__(self, nodes):
        self.nodes = np.asarray(nodes, dtype=float)
        self.lengths = np.diff(self.nodes)
        self.midpoints = (self.nodes[1:] + self.nodes[:-1]) / 2
        points, weights = np.polynomial.legendre.leggauss(GAUSS_ORDER)
        self._gauss_points = (points + 1) / 2
        self._gauss_weights = weights / 2

    def size(self):
        return len(self.nodes)

    def fluxes(self, coefficient):
        return coefficient(self.midpoints) / self.lengths

    def stiffness(self, coefficient):
        """Diagonal and upper diagonal of the symmetric matrix of
        -(coefficient w')' with natural conditions at both ends."""
        flux = self.fluxes(coefficient)
        diagonal = np.zeros(self.size())
        diagonal[:-1] += flux
        diagonal[1:] += flux
        return diagonal, -flux

    def _integrate(self, density, lower, upper):
        span = upper - lower
        points = lower[:, None] + span[:, None] * self._gauss_points
        return span * (density(points) @ self._gauss_weights)

    def weights(self, exponent_at_0, exponent_at_1, smooth):
        def density(t):
            return t ** exponent_at_0 * (1 - t) ** exponent_at_1 * smooth(t)

        nodes = self.nodes
        weights = np.empty(self.size())
        left = self._integrate(density, self.midpoints[:-1], nodes[1:-1])
        right = self._integrate(density, nodes[1:-1], self.midpoints[1:])
        weights[1:-1] = left + right

        if exponent_at_0 <= -1:
            weights[0] = np.inf
        else:
            weights[0] = smooth(0.0) * self.midpoints[0] ** \
                (exponent_at_0 + 1) / (exponent_at_0 + 1)
        if exponent_at_1 <= -1:
            weights[-1] = np.inf
        else:
            weights[-1] = smooth(1.0) * (1 - self.midpoints[-1]) ** \
                (exponent_at_1 + 1) / (exponent_at_1 + 1)
        return weights

    def refined(self):
        nodes = np.empty(2 * self.size() - 1)
        nodes[::2] = self.nodes
        nodes[1::2] = self.midpoints
        return FiniteVolume(nodes)
