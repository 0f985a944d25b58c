"""Angular beam correlation and the directed beam graph.

Each codebook beam becomes a node. A node receives edges from the two beams
whose pointing directions correlate most strongly with its own, so message
passing lets every beam consult its closest angular neighbors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook


def angular_correlation(a: tuple, b: tuple) -> float:
    """Cosine similarity of two pointing directions given as (phi, theta).

    Equals the dot product of the corresponding unit vectors; clipped to
    [-1, 1] to absorb floating-point rounding at coincident directions.
    """
    phi_p, theta_p = a
    phi_q, theta_q = b
    value = (np.sin(theta_p) * np.sin(theta_q) * np.cos(phi_p - phi_q)
             + np.cos(theta_p) * np.cos(theta_q))
    return float(np.clip(value, -1.0, 1.0))


def correlation_matrix(azimuths: np.ndarray, elevations: np.ndarray) -> np.ndarray:
    """Pairwise angular correlation of a beam set (symmetric, unit diagonal)."""
    sin_t, cos_t = np.sin(elevations), np.cos(elevations)
    delta = (np.outer(sin_t, sin_t) * np.cos(azimuths[:, None] - azimuths[None, :])
             + np.outer(cos_t, cos_t))
    return np.clip(delta, -1.0, 1.0)


@dataclass(frozen=True)
class BeamGraph:
    """Directed graph over codebook beams.

    ``in_neighbors[i]`` holds the two nodes with edges pointing into node i,
    stored in ascending index order so that aggregation order is fixed.
    """

    node_count: int
    azimuths: np.ndarray
    elevations: np.ndarray
    in_neighbors: np.ndarray  # (node_count, 2) int array

    @property
    def edges(self) -> list:
        """All (src, dst) pairs, grouped by destination."""
        return [(int(src), dst)
                for dst in range(self.node_count)
                for src in self.in_neighbors[dst]]


def build_graph(cb: Codebook) -> BeamGraph:
    """Connect each beam to its two most-correlated peers (edges point inward).

    Ties are broken toward the lower beam index. Requires at least three
    beams so that every node has two distinct in-neighbors.
    """
    n = len(cb)
    if n < 3:
        raise ValueError("beam graph needs a codebook with at least 3 beams")
    delta = correlation_matrix(cb.azimuths, cb.elevations)
    np.fill_diagonal(delta, -np.inf)
    # Stable sort on -delta keeps lower indices first among ties.
    order = np.argsort(-delta, axis=1, kind="stable")
    neighbors = np.sort(order[:, :2], axis=1)
    return BeamGraph(
        node_count=n,
        azimuths=cb.azimuths.copy(),
        elevations=cb.elevations.copy(),
        in_neighbors=neighbors.astype(np.int64),
    )


def in_neighbors(g: BeamGraph, i: int) -> tuple:
    """The ordered pair of node indices with edges into node ``i``."""
    if not 0 <= i < g.node_count:
        raise IndexError(f"node index {i} out of range for {g.node_count} nodes")
    pair = g.in_neighbors[i]
    return int(pair[0]), int(pair[1])


def write_edge_csv(g: BeamGraph, path) -> None:
    """Dump the edge list as ``src,dst,delta`` rows for inspection."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "delta"])
        for src, dst in g.edges:
            delta = angular_correlation(
                (g.azimuths[src], g.elevations[src]),
                (g.azimuths[dst], g.elevations[dst]),
            )
            writer.writerow([src, dst, repr(delta)])
