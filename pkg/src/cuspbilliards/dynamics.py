"""The billiard map T on the collision space, measure-correct sampling and
orbit drivers.

A collision is (r, phi): r the clockwise abscissa mod the perimeter, phi in
(0, pi) the angle from the traversal tangent to the outgoing direction.
The invariant measure is d(mu) = sin(phi) dr dphi / (2 |dQ|).  Orbits that
hit a corner, a cusp vertex, or graze within 1e-12 are discarded by the
Monte-Carlo drivers, never perturbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernel
from .geometry import SingularPointError, piece_at

TOL_GRAZE = 1e-12


class SingularOrbitError(RuntimeError):
    """Orbit hit the singular set (corner, vertex, or grazing collision)."""


_STATUS_NAMES = {
    _kernel.OK: "ok",
    _kernel.GRAZE: "grazing collision",
    _kernel.CORNER: "corner point hit",
    _kernel.VERTEX: "cusp vertex hit",
    _kernel.NOHIT: "ray escaped (numerical)",
}


@dataclass(frozen=True)
class Collision:
    r: float
    phi: float

    def __post_init__(self):
        if not (0.0 < self.phi < np.pi):
            raise ValueError(f"phi={self.phi} outside (0, pi)")

    def reversed(self):
        """Velocity reversal (r, phi) -> (r, pi - phi)."""
        return Collision(self.r, np.pi - self.phi)


class PackedTable:
    """TableSpec plus its flattened kernel arrays (built once, shared)."""

    def __init__(self, table):
        self.table = table
        self.arrays = _kernel.pack_table(table)

    @property
    def perimeter(self):
        return self.arrays[4]


def get_packed(table):
    if isinstance(table, PackedTable):
        return table
    if not hasattr(table, "_packed_cache"):
        object.__setattr__(table, "_packed_cache", PackedTable(table))
    return table._packed_cache


def reflect(incoming, normal, tol_graze=TOL_GRAZE):
    """Specular reflection of a unit vector off a wall with inward normal."""
    incoming = np.asarray(incoming, dtype=float)
    normal = np.asarray(normal, dtype=float)
    dn = float(incoming @ normal)
    if abs(dn) < tol_graze:
        raise SingularOrbitError("grazing collision")
    if dn > 0:
        raise ValueError("incoming direction must point against the normal")
    return incoming - 2.0 * dn * normal


def next_collision(table, x, return_state=False):
    """Apply the billiard map once: (Collision, free_path).

    Raises SingularOrbitError on grazing / corner / vertex events.
    """
    packed = get_packed(table)
    ptype, pp, plen, poff, perim, wlabel = packed.arrays
    piece_at(packed.table, x.r)  # reject abscissas on junctions
    piece, param, dx, dy = _kernel.state_from_rphi(
        ptype, pp, plen, poff, perim, x.r, x.phi
    )
    status, piece, param, phi, dx, dy, tau = _kernel.step(
        ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy
    )
    if status != _kernel.OK:
        raise SingularOrbitError(_STATUS_NAMES.get(status, str(status)))
    r = _kernel.abscissa_of_param(ptype, pp, poff, piece, param)
    out = Collision(float(r), float(phi))
    if return_state:
        return out, float(tau), (piece, param, dx, dy)
    return out, float(tau)


def sample_mu(table, rng):
    """One collision distributed by the invariant measure mu."""
    perim = get_packed(table).perimeter
    r = rng.random() * perim
    phi = np.arccos(1.0 - 2.0 * rng.random())
    return Collision(float(r), float(phi))


def sample_mu_conditioned(table, rng, intervals=None):
    """mu-sample conditioned off the given abscissa intervals (default: the
    cusp neighborhoods, i.e. a sample of mu(.|M))."""
    table_spec = get_packed(table).table
    if intervals is None:
        intervals = table_spec.cusp_intervals()
    perim = table_spec.perimeter
    while True:
        x = sample_mu(table_spec, rng)
        if not in_intervals(x.r, intervals, perim):
            return x


def in_intervals(r, intervals, perim):
    """Whether abscissa r lies in any of the (possibly wrapping) intervals."""
    r = r % perim
    for lo, hi in intervals:
        lo_m = lo % perim
        width = hi - lo
        if lo_m + width <= perim:
            if lo_m <= r < lo_m + width:
                return True
        else:
            if r >= lo_m or r < lo_m + width - perim:
                return True
    return False


def mu_of_boundary_region(table, arcs):
    """mu-measure of a set of abscissa intervals (the phi-marginal integrates
    to one, so this is total arclength over the perimeter)."""
    perim = get_packed(table).perimeter
    marks = []
    total = 0.0
    for lo, hi in arcs:
        if hi < lo:
            raise ValueError(f"interval ({lo}, {hi}) reversed")
        if hi - lo > perim:
            raise ValueError("interval longer than the perimeter")
        marks.append((lo % perim, hi - lo))
        total += hi - lo
    marks.sort()
    for (a, wa), (b, wb) in zip(marks, marks[1:]):
        if a + wa > b:
            raise ValueError("overlapping intervals")
    if marks and marks[-1][0] + marks[-1][1] > perim + marks[0][0]:
        raise ValueError("overlapping intervals (wrap)")
    return total / perim


def orbit(table, x0, nsteps, collect=True):
    """Iterate the map nsteps times from x0.

    Returns (collisions, free_paths); raises SingularOrbitError mid-orbit
    with no partial data (drivers that tolerate discards catch it).
    """
    packed = get_packed(table)
    ptype, pp, plen, poff, perim, wlabel = packed.arrays
    piece, param, dx, dy = _kernel.state_from_rphi(
        ptype, pp, plen, poff, perim, x0.r, x0.phi
    )
    out_r = np.empty(nsteps)
    out_phi = np.empty(nsteps)
    out_tau = np.empty(nsteps)
    status, done = _kernel.run_orbit(
        ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy,
        nsteps, out_r, out_phi, out_tau,
    )
    if status != _kernel.OK:
        raise SingularOrbitError(
            f"{_STATUS_NAMES.get(status, status)} after {done} steps"
        )
    if collect:
        return out_r, out_phi, out_tau
    return None


def simulate_orbits(table, n_orbits, n_steps, seed):
    """Seeded ensemble of orbits; returns a record array for CSV output.

    Singular orbits are discarded and resampled; the count is reported in
    the second return value.
    """
    rng = np.random.default_rng(seed)
    rows = np.empty(n_orbits * n_steps,
                    dtype=[("orbit_id", np.int64), ("step", np.int64),
                           ("r", float), ("phi", float), ("free_path", float)])
    discards = 0
    k = 0
    for oid in range(n_orbits):
        while True:
            x0 = sample_mu(table, rng)
            try:
                rs, phis, taus = orbit(table, x0, n_steps)
                break
            except SingularOrbitError:
                discards += 1
        for j in range(n_steps):
            rows[k] = (oid, j, rs[j], phis[j], taus[j])
            k += 1
    return rows, discards
