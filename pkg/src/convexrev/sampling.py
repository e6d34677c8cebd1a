"""Deterministic direction sampling and seeded random rotations.

Every routine takes an explicit seed (or derived rng) so that residuals are
reproducible; nothing here touches global random state.
"""

import numpy as np
from scipy.stats import special_ortho_group

_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def child_rng(seed, *keys):
    """An rng derived from (seed, *keys); identical inputs give identical streams."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def sphere_directions(dim, count, seed=0):
    """Unit directions on S^(dim-1), deterministic for (dim, count, seed).

    d=2 uses equal angles with a seeded offset, d=3 a Fibonacci spiral under a
    seeded rotation, d>=4 seeded normalized Gaussians.  Rows are unit vectors.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    if dim == 1:
        return np.array([[1.0] if k % 2 == 0 else [-1.0] for k in range(count)])
    rng = child_rng(seed, dim, count)
    if dim == 2:
        offset = rng.uniform(0.0, 2.0 * np.pi)
        theta = offset + 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if dim == 3:
        k = np.arange(count)
        z = 1.0 - (2.0 * k + 1.0) / count
        phi = 2.0 * np.pi * k / _GOLDEN
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        rot = special_ortho_group.rvs(3, random_state=rng)
        return pts @ rot.T
    vecs = rng.standard_normal((count, dim))
    norms = np.linalg.norm(vecs, axis=1)
    # resample the (measure-zero) degenerate rows rather than dividing by ~0
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        vecs[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(vecs, axis=1)
    return vecs / norms[:, None]


def random_rotation(dim, rng):
    """A random rotation matrix drawn from the seeded generator."""
    if dim == 1:
        return np.ones((1, 1))
    return special_ortho_group.rvs(dim, random_state=rng)


def rotations_fixing_axis(axis, count, seed=0):
    """Orthogonal maps of R^d fixing the given unit axis pointwise.

    Built as W diag(1, O) W^T with O acting on the orthogonal complement: a
    seeded random rotation for d >= 3, and the reflection (the only
    nontrivial element of O(1)) for d = 2.
    """
    axis = np.asarray(axis, dtype=float)
    dim = axis.shape[0]
    comp = complement_basis(axis.reshape(-1, 1))
    w = np.column_stack([axis / np.linalg.norm(axis), comp])
    if dim == 2:
        block = np.diag([1.0, -1.0])
        return [w @ block @ w.T] * max(count, 1)
    rng = child_rng(seed, dim, count, 7)
    out = []
    for _ in range(count):
        block = np.eye(dim)
        block[1:, 1:] = random_rotation(dim - 1, rng)
        out.append(w @ block @ w.T)
    return out


def complement_basis(basis):
    """Orthonormal basis (columns) of the orthogonal complement of span(basis)."""
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.shape[0] < basis.shape[1]:
        raise ValueError("basis must be given as columns")
    dim, k = basis.shape
    q, _ = np.linalg.qr(np.hstack([basis, np.eye(dim)]))
    comp = q[:, k:dim]
    # re-orthogonalize against the input for numerical safety
    comp -= basis @ (basis.T @ comp)
    q2, _ = np.linalg.qr(comp)
    return q2[:, : dim - k]


def orthonormalize(vectors):
    """Orthonormal column basis spanning the same space as the given columns."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    q, r = np.linalg.qr(vectors)
    keep = np.abs(np.diag(r)) > 1e-12
    return q[:, keep]


def random_invertible(dim, rng, cond_max=50.0):
    """Random invertible matrix with condition number <= cond_max."""
    u = random_rotation(dim, rng)
    v = random_rotation(dim, rng)
    half = np.sqrt(cond_max)
    sv = np.exp(rng.uniform(-np.log(half), np.log(half), size=dim))
    return (u * sv) @ v.T
