"""Trapezoidal rule on circles with node doubling."""

from __future__ import annotations

import math

import numpy as np

from .errors import QuadratureStall


def circle_mean(fn, radius: float, n0: int, tol: float, max_nodes: int = 2**20):
    """``(1/2pi) * integral_0^{2pi} fn(radius e^{i theta}) d theta``.

    Doubles the node count from ``n0`` until two successive estimates differ
    by less than ``tol``. Returns ``(value, nodes)``. Midpoints are added on
    each doubling so earlier evaluations are reused; summation is pairwise in
    a fixed order, so results do not depend on threading.
    """
    m = int(n0)
    theta = 2.0 * math.pi * np.arange(m) / m
    total = np.sum(fn(radius * np.exp(1j * theta)))
    est = total / m
    while m < max_nodes:
        theta = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        total = total + np.sum(fn(radius * np.exp(1j * theta)))
        m *= 2
        new = total / m
        if abs(new - est) < tol:
            return complex(new), m
        est = new
    raise QuadratureStall(f"trapezoidal rule on |z| = {radius} not converged with {m} nodes")
