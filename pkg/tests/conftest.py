"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's solution paths: explicit
cofactor inverses for normal equations, circumcircle fits for concyclicity,
finite differences for Jacobians.
"""

import numpy as np
import pytest

from rssloc.bench import scenario_registry


@pytest.fixture(scope="session")
def scenario_2d():
    return scenario_registry()["2d-fixed"]


@pytest.fixture(scope="session")
def scenario_3d():
    return scenario_registry()["3d-fixed"]


@pytest.fixture(scope="session")
def random_family():
    return scenario_registry()["2d-random"]


SQUARE_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

COLLINEAR_2D = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])


def det_recursive(mat):
    """Determinant by cofactor expansion; independent of numpy.linalg."""
    mat = np.asarray(mat, dtype=float)
    k = mat.shape[0]
    if k == 1:
        return mat[0, 0]
    if k == 2:
        return mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    total = 0.0
    for j in range(k):
        minor = np.delete(np.delete(mat, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * mat[0, j] * det_recursive(minor)
    return total


def cofactor_inverse(mat):
    """Explicit adjugate/determinant inverse for small matrices."""
    mat = np.asarray(mat, dtype=float)
    k = mat.shape[0]
    det = det_recursive(mat)
    cof = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            minor = np.delete(np.delete(mat, i, axis=0), j, axis=1)
            cof[i, j] = (-1.0) ** (i + j) * det_recursive(minor)
    return cof.T / det


def normal_equations_solve(design, rhs):
    """Brute-force least squares: (A^T A)^{-1} A^T b via cofactor inverse."""
    gram = design.T @ design
    return cofactor_inverse(gram) @ (design.T @ rhs)


def circumcircle(p1, p2, p3):
    """Center and radius of the circle through three 2-D points.

    Solved from the two perpendicular-bisector equations with Cramer's rule.
    Returns None for (near-)collinear triples.
    """
    a1 = 2.0 * (p2 - p1)
    a2 = 2.0 * (p3 - p1)
    b1 = p2 @ p2 - p1 @ p1
    b2 = p3 @ p3 - p1 @ p1
    det = a1[0] * a2[1] - a1[1] * a2[0]
    if abs(det) < 1e-12:
        return None
    cx = (b1 * a2[1] - b2 * a1[1]) / det
    cy = (a1[0] * b2 - a2[0] * b1) / det
    center = np.array([cx, cy])
    return center, float(np.linalg.norm(p1 - center))


def points_concyclic(points, tol=1e-9):
    """Brute-force concyclicity: fit a circle to the first three points and
    check every point's distance to its center."""
    points = np.asarray(points, dtype=float)
    fit = circumcircle(points[0], points[1], points[2])
    if fit is None:
        return False
    center, radius = fit
    return bool(np.all(np.abs(np.linalg.norm(points - center, axis=1) - radius) < tol))
