"""State-space discretization with a certified uniform error bound.

Grid points are grouped into cells whose members agree with a representative
point to within a resolution gamma, simultaneously in per-player costs
(summed over layers, max over profiles) and in transition densities
(integrated against the quadrature weights, max over profiles).  Collapsing
each cell to its representative yields a surrogate game whose discounted
costs differ from the original by at most

    error_bound(gamma) = gamma * (1 - alpha + b * alpha) / (1 - alpha)

uniformly over strategies, states, players, and layers.  The bound comes from
the one-step coupling: the cost mismatch contributes gamma in total and the
kernel mismatch contributes at most b * gamma per step at discount alpha.
"""

from dataclasses import dataclass

import numpy as np

from .evaluation import evaluate_markov_profile, evaluate_profile
from .game import FiniteCSG, StationaryProfile

__all__ = [
    "Partition",
    "DiscretizedGame",
    "ApproximationReport",
    "error_bound",
    "resolution_for",
    "build_partition",
    "check_partition",
    "surrogate_game",
    "grid_game",
    "surrogate_grid_game",
    "lift_strategy",
    "verify_approximation_bound",
]

STOCHASTIC_TOL = 1e-9


def error_bound(resolution, discount, cost_bound):
    """Uniform discounted-cost error certified by a partition at `resolution`."""
    if resolution < 0.0:
        raise ValueError("resolution must be nonnegative")
    if not 0.0 < discount < 1.0:
        raise ValueError("discount must lie in (0, 1)")
    return resolution * (1.0 - discount + cost_bound * discount) / (1.0 - discount)


def resolution_for(error, discount, cost_bound):
    """Partition resolution whose certified error equals `error` (inverse of
    error_bound)."""
    if error < 0.0:
        raise ValueError("error must be nonnegative")
    if not 0.0 < discount < 1.0:
        raise ValueError("discount must lie in (0, 1)")
    return error * (1.0 - discount) / (1.0 - discount + cost_bound * discount)


@dataclass(frozen=True)
class Partition:
    """Cells over grid indices with one representative point per cell."""

    resolution: float
    cells: tuple
    representatives: np.ndarray

    def __post_init__(self):
        cells = tuple(np.array(c, dtype=int) for c in self.cells)
        for c in cells:
            c.setflags(write=False)
        reps = np.array(self.representatives, dtype=int)
        reps.setflags(write=False)
        if len(cells) != reps.shape[0]:
            raise ValueError("one representative per cell required")
        n_points = sum(c.size for c in cells)
        members = np.concatenate(cells) if cells else np.array([], dtype=int)
        if n_points == 0 or np.unique(members).size != n_points:
            raise ValueError("cells must disjointly cover the grid")
        cell_of = np.full(n_points, -1, dtype=int)
        for k, c in enumerate(cells):
            if np.any(c < 0) or np.any(c >= n_points):
                raise ValueError("cell member index out of range")
            if reps[k] not in c:
                raise ValueError(f"representative of cell {k} is not a member")
            cell_of[c] = k
        cell_of.setflags(write=False)
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "representatives", reps)
        object.__setattr__(self, "cell_of", cell_of)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_points(self):
        return self.cell_of.shape[0]


@dataclass(frozen=True)
class DiscretizedGame:
    """Surrogate finite game over partition cells, with its certified bound."""

    game: FiniteCSG
    partition: Partition
    certified_error: float


def _cost_distances(spec, rep):
    """Per-point, per-player cost distance to `rep`: sum over layers of the
    max-over-profiles absolute difference, maximized over players."""
    diff = np.abs(spec.costs - spec.costs[:, :, rep:rep + 1, :])
    return diff.max(axis=3).sum(axis=1).max(axis=0)


def _density_distances(spec, rep):
    """Per-point density distance to `rep`: integrated absolute difference
    against the weights, maximized over profiles."""
    diff = np.abs(spec.density - spec.density[rep:rep + 1])
    return (diff @ spec.weights).max(axis=1)


def build_partition(spec, resolution):
    """Greedy first-fit covering of the grid in index order.

    Each point joins the first existing cell whose representative is strictly
    within `resolution` in both the cost and the density distance, otherwise
    it opens a new cell with itself as representative.  The result is
    re-checked with check_partition before it is returned.
    """
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    reps = []
    members = []
    cost_rows = []
    density_rows = []
    for m in range(spec.n_points):
        placed = False
        for k in range(len(reps)):
            if cost_rows[k][m] < resolution and density_rows[k][m] < resolution:
                members[k].append(m)
                placed = True
                break
        if not placed:
            reps.append(m)
            members.append([m])
            cost_rows.append(_cost_distances(spec, m))
            density_rows.append(_density_distances(spec, m))
    partition = Partition(
        resolution=resolution,
        cells=tuple(np.array(c, dtype=int) for c in members),
        representatives=np.array(reps, dtype=int),
    )
    check_partition(spec, partition)
    return partition


def check_partition(spec, partition):
    """Re-verify the partition invariants against a spec: disjoint cover of
    the grid and strict resolution conditions for every member.  Raises
    ValueError on any violation."""
    if partition.n_points != spec.n_points:
        raise ValueError(
            f"partition covers {partition.n_points} points, spec has {spec.n_points}"
        )
    for k, cell in enumerate(partition.cells):
        rep = int(partition.representatives[k])
        cost_d = _cost_distances(spec, rep)[cell]
        dens_d = _density_distances(spec, rep)[cell]
        if np.any(cost_d >= partition.resolution):
            worst = int(cell[np.argmax(cost_d)])
            raise ValueError(
                f"cell {k}: point {worst} has cost distance {cost_d.max():.6g} "
                f">= resolution {partition.resolution:.6g}"
            )
        if np.any(dens_d >= partition.resolution):
            worst = int(cell[np.argmax(dens_d)])
            raise ValueError(
                f"cell {k}: point {worst} has density distance {dens_d.max():.6g} "
                f">= resolution {partition.resolution:.6g}"
            )


def surrogate_game(spec, partition):
    """Collapse each cell to its representative.

    Surrogate costs copy the representative rows; surrogate transitions put on
    each target cell the representative's density mass over that cell's
    members; the initial distribution aggregates over cells.  Raises
    ValueError if the aggregated rows fail stochasticity beyond 1e-9, which
    indicates a malformed spec.
    """
    check_partition(spec, partition)
    reps = partition.representatives
    n_cells = partition.n_cells
    membership = np.zeros((spec.n_points, n_cells))
    membership[np.arange(spec.n_points), partition.cell_of] = 1.0
    weighted = spec.density[reps] * spec.weights[None, None, :]
    transitions = weighted @ membership
    row_sums = transitions.sum(axis=2)
    if np.max(np.abs(row_sums - 1.0)) > STOCHASTIC_TOL:
        bad = np.unravel_index(np.argmax(np.abs(row_sums - 1.0)), row_sums.shape)
        raise ValueError(
            f"surrogate transition row {bad} sums to {row_sums[bad]:.12g}; "
            "the spec's density does not integrate to 1"
        )
    game = FiniteCSG(
        n_actions=spec.n_actions,
        costs=spec.costs[:, :, reps, :],
        transitions=transitions,
        discount=spec.discount,
        initial=membership.T @ spec.initial,
        constraint_bounds=spec.constraint_bounds,
        cost_bound=spec.cost_bound,
    )
    return DiscretizedGame(
        game=game,
        partition=partition,
        certified_error=error_bound(partition.resolution, spec.discount, spec.cost_bound),
    )


def grid_game(spec):
    """The spec itself as a finite game over grid points: the kernel is the
    density times the quadrature weight of the target point."""
    return FiniteCSG(
        n_actions=spec.n_actions,
        costs=spec.costs,
        transitions=spec.density * spec.weights[None, None, :],
        discount=spec.discount,
        initial=spec.initial,
        constraint_bounds=spec.constraint_bounds,
        cost_bound=spec.cost_bound,
    )


def surrogate_grid_game(spec, partition):
    """Surrogate data spread back over the full grid: every point carries its
    cell representative's costs and density.  Strategies need not respect the
    partition here, which is what the uniform error bound quantifies over."""
    reps_of = partition.representatives[partition.cell_of]
    return FiniteCSG(
        n_actions=spec.n_actions,
        costs=spec.costs[:, :, reps_of, :],
        transitions=spec.density[reps_of] * spec.weights[None, None, :],
        discount=spec.discount,
        initial=spec.initial,
        constraint_bounds=spec.constraint_bounds,
        cost_bound=spec.cost_bound,
    )


def lift_strategy(partition, profile):
    """Spread a profile over cells back to the grid (constant on each cell)."""
    if profile.n_states != partition.n_cells:
        raise ValueError(
            f"profile has {profile.n_states} states, partition {partition.n_cells} cells"
        )
    return StationaryProfile(tuple(rows[partition.cell_of] for rows in profile.rows))


@dataclass(frozen=True)
class ApproximationReport:
    max_deviation: float
    certified_error: float
    per_strategy: np.ndarray

    @property
    def within_bound(self):
        return self.max_deviation <= self.certified_error + 1e-12


def verify_approximation_bound(spec, partition, strategies):
    """Measure the actual cost deviation between the grid game and the
    surrogate-data grid game over a strategy sample.

    Each entry of `strategies` is a StationaryProfile over grid points or a
    (heads, tail) pair of such profiles for a finite-head Markov plan.  The
    deviation is maximized over players, layers, and initial states and must
    stay within the certified error bound.
    """
    original = grid_game(spec)
    surrogate = surrogate_grid_game(spec, partition)
    deviations = []
    for entry in strategies:
        if isinstance(entry, StationaryProfile):
            a = evaluate_profile(original, entry)
            b = evaluate_profile(surrogate, entry)
        else:
            heads, tail = entry
            a = evaluate_markov_profile(original, heads, tail)
            b = evaluate_markov_profile(surrogate, heads, tail)
        deviations.append(float(np.max(np.abs(a.Jx - b.Jx))))
    per_strategy = np.asarray(deviations, dtype=float)
    return ApproximationReport(
        max_deviation=float(per_strategy.max()) if per_strategy.size else 0.0,
        certified_error=error_bound(partition.resolution, spec.discount, spec.cost_bound),
        per_strategy=per_strategy,
    )
