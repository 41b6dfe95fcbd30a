"""Composite Gauss-Legendre panel grids.

Two grid builders cover every integral in the package:

* ``wall_refined_grid``  -- symmetric x-grid on [-X, X] with dyadic panel
  refinement toward 0, where the weight mu is only Hoelder continuous for
  small multiplicities.
* ``radial_spectral_grid`` -- panels on [0, L] of uniform length tied to the
  largest time horizon, so cos(2tr)/sin(2tr) stay resolved for all |t| <= T.

All reductions downstream are plain ``np.sum`` over fixed arrays, which keeps
results independent of BLAS threading.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PanelGrid", "wall_refined_grid", "radial_spectral_grid", "panel_grid"]


@dataclass(frozen=True)
class PanelGrid:
    """Nodes/weights of a composite Gauss rule, plus the panel edges."""

    nodes: np.ndarray
    weights: np.ndarray
    edges: np.ndarray
    order: int

    def integrate(self, values: np.ndarray) -> complex:
        return np.sum(values * self.weights, axis=-1)

    def refined(self, factor: int = 2) -> "PanelGrid":
        """Same edge skeleton with every panel split ``factor`` ways."""
        edges = [self.edges[0]]
        for a, b in zip(self.edges[:-1], self.edges[1:]):
            for j in range(1, factor + 1):
                edges.append(a + (b - a) * j / factor)
        return panel_grid(np.array(edges), self.order)


def panel_grid(edges: np.ndarray, order: int) -> PanelGrid:
    edges = np.asarray(edges, dtype=float)
    gx, gw = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        h = 0.5 * (b - a)
        nodes.append(h * gx + 0.5 * (a + b))
        weights.append(h * gw)
    return PanelGrid(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        edges=edges,
        order=order,
    )


def wall_refined_grid(
    x_max: float,
    order: int = 12,
    levels: int = 36,
    coarse_len: float = 0.25,
) -> PanelGrid:
    """Symmetric grid on [-x_max, x_max], dyadically refined toward x = 0.

    Panel edges are +-x_max * 2^-j down to level ``levels``; the innermost
    panel [ -x_max 2^-levels, x_max 2^-levels ] is kept whole (the integrands
    carried here vanish at 0 at least like |x|^(2 min k)).  Panels longer than
    ``coarse_len`` are split evenly.
    """
    pts = [x_max * 0.5**j for j in range(levels + 1)]
    edges = sorted({-p for p in pts} | set(pts))
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(1, int(np.ceil((b - a) / coarse_len)))
        for j in range(1, n + 1):
            out.append(a + (b - a) * j / n)
    return panel_grid(np.array(out), order)


def radial_spectral_grid(
    lam_max: float,
    t_max: float,
    order: int = 8,
    max_panel_len: float = 0.25,
) -> PanelGrid:
    """Uniform panels on [0, lam_max] resolving e^{2 i t r} for |t| <= t_max."""
    plen = min(max_panel_len, np.pi / (2.0 * (1.0 + 2.0 * abs(t_max))))
    n = int(np.ceil(lam_max / plen))
    return panel_grid(np.linspace(0.0, lam_max, n + 1), order)
