# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import numpy as np
import pytest

import hardy.mesh as mesh


@pytest.mark.fast
def test_graded_nodes():
    nodes = mesh.graded_nodes(100)
    assert len(nodes) == 101
    assert nodes[0] == 0 and nodes[-1] == 1
    assert np.all(np.diff(nodes) > 0)
    assert nodes[1] == pytest.approx(2e-4)
    assert np.allclose(nodes + nodes[::-1], 1)


@pytest.mark.fast
def test_verification_grid_is_interior():
    grid = mesh.verification_grid(1000)
    assert len(grid) == 1000
    assert grid[0] > 0 and grid[-1] < 1


@pytest.mark.fast
def test_profile_grid():
    grid = mesh.profile_grid()
    assert grid[0] == pytest.approx(1e-3)
    assert grid[-1] == pytest.approx(1 - 1e-3)
    assert np.all(np.diff(grid) > 0)
    middle = grid[(grid > 0.2) & (grid < 0.8)]
    assert np.allclose(np.diff(middle), 0.002)


@pytest.mark.fast
def test_weights_integrate_density():
    volume = mesh.FiniteVolume(mesh.graded_nodes(400))
    weights = volume.weights(0.5, -0.5, lambda t: 1 + t)
    # ∫ t^(1/2) (1-t)^(-1/2) (1+t) dt = B(3/2, 1/2) + B(5/2, 1/2)
    exact = np.pi / 2 + 3 * np.pi / 8
    assert np.sum(weights) == pytest.approx(exact, rel=1e-5)


@pytest.mark.fast
def test_weights_nonintegrable_endpoint():
    volume = mesh.FiniteVolume(mesh.graded_nodes(10))
    weights = volume.weights(-1, 0, lambda t: np.ones_like(t))
    assert np.isinf(weights[0])
    assert np.all(np.isfinite(weights[1:]))


@pytest.mark.fast
def test_stiffness_annihilates_constants():
    volume = mesh.FiniteVolume(mesh.cosine_nodes(50))
    diagonal, upper = volume.stiffness(lambda t: 1 + t * t)
    product = diagonal * 1.0
    product[:-1] += upper
    product[1:] += upper
    assert np.allclose(product, 0, atol=1e-9)


@pytest.mark.fast
def test_refined_keeps_nodes():
    volume = mesh.FiniteVolume(mesh.graded_nodes(20))
    refined = volume.refined()
    assert refined.size() == 41
    assert np.array_equal(refined.nodes[::2], volume.nodes)
