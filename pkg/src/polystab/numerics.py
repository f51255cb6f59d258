"""Quadrature and finite-difference kernels on the uniform channel grid."""

from __future__ import annotations

import numpy as np


def simpson(f, h: float) -> float:
    """Composite Simpson rule over all nodes (odd node count)."""
    f = np.asarray(f)
    if f.size % 2 == 0 or f.size < 3:
        raise ValueError("composite Simpson needs an odd number of nodes >= 3")
    return h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())


def cumulative(f, h: float) -> np.ndarray:
    """Running integral from the first node, composite Simpson at every node.

    Even nodes accumulate Simpson panels from node 0.  Odd nodes accumulate
    Simpson panels from node 1 on top of a fourth-order first-cell value, so
    both node families carry a smooth O(h^4) error.
    """
    f = np.asarray(f)
    n = f.size
    if n % 2 == 0 or n < 5:
        raise ValueError("cumulative Simpson needs an odd number of nodes >= 5")
    out = np.zeros(n, dtype=np.result_type(f, float))
    even_panels = h / 3.0 * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    out[2::2] = np.cumsum(even_panels)
    out[1] = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
    odd_panels = h / 3.0 * (f[1:-3:2] + 4.0 * f[2:-2:2] + f[3:-1:2])
    out[3:-1:2] = out[1] + np.cumsum(odd_panels)
    return out


def solve_dirichlet(source, h: float, left: float, right: float) -> np.ndarray:
    """Solve w'' = source on the grid with w(first) = left, w(last) = right.

    Two nested running integrals give the particular solution vanishing with
    its slope at the left wall; the linear part then matches both walls.
    """
    y = np.arange(len(source)) * h
    inner = cumulative(source, h)
    particular = cumulative(inner, h)
    length = y[-1]
    slope = (right - left - particular[-1]) / length
    w = left + slope * y + particular
    w[0], w[-1] = left, right
    return w


def d1(f, h: float) -> np.ndarray:
    """Fourth-order first derivative; centered inside, one-sided near walls."""
    f = np.asarray(f)
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    out[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    out[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    return out


def d2_interior(f, h: float) -> np.ndarray:
    """Fourth-order centered second derivative at nodes 2 .. n-3."""
    f = np.asarray(f)
    return (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)


def d1_interior(f, h: float) -> np.ndarray:
    """Fourth-order centered first derivative at nodes 2 .. n-3."""
    f = np.asarray(f)
    return (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
