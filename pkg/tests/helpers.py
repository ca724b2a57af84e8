"""Shared generators for randomized tests (all seeded by the caller)."""

import numpy as np

from elastica.mesh import TWO_PI, Grid


def perturbed_polygon(rng, n_vertices, dimension, radius=1.0, wobble=0.2):
    """Regular polygon with bounded coordinate noise; never degenerate for
    wobble safely below the edge length."""
    u = TWO_PI * np.arange(n_vertices) / n_vertices
    x = np.zeros((n_vertices, dimension))
    x[:, 0] = radius * np.cos(u)
    x[:, 1] = radius * np.sin(u)
    x += wobble * rng.uniform(-1.0, 1.0, size=x.shape)
    lengths = np.linalg.norm(x - np.roll(x, 1, axis=0), axis=1)
    assert lengths.min() > 1e-3, "generated polygon too close to degenerate"
    return x


def random_rotation(rng, dimension):
    """Haar-ish orthogonal matrix from a QR factorization."""
    q, r = np.linalg.qr(rng.normal(size=(dimension, dimension)))
    return q * np.sign(np.diag(r))


def random_nonuniform_grid(rng, n_vertices):
    widths = rng.uniform(0.5, 1.5, size=n_vertices)
    widths *= TWO_PI / widths.sum()
    nodes = np.concatenate([[0.0], np.cumsum(widths)])
    nodes[-1] = TWO_PI
    return Grid(nodes)
