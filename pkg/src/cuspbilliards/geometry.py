"""Billiard tables built from dispersing circular arcs and power-law cusp walls.

Conventions used throughout the package:

* the boundary is a cyclic chain of pieces listed in clockwise order;
* ``r`` is the clockwise arclength abscissa, taken mod the perimeter;
* the traversal tangent ``t`` points in the direction of increasing ``r``
  and the inward normal is ``n = (t_y, -t_x)``;
* a cusp wall is the graph ``z = side * c * s**beta / beta`` in a local
  frame whose first axis points from the vertex into the table.

The local wall model is taken exactly (zero higher-order remainder), so
wall values and derivatives used by tests are exact arithmetic.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


class GeometryError(ValueError):
    """Invalid geometric construction or parameters."""


class SingularPointError(GeometryError):
    """Abscissa or trajectory lands on a corner point or cusp vertex."""


def wall_profile(c, beta, s):
    """Height and slope of the local cusp-wall model at coordinate s >= 0."""
    s = float(s)
    if s < 0:
        raise GeometryError(f"wall coordinate s={s} < 0")
    if s == 0.0:
        return 0.0, 0.0
    return c * s**beta / beta, c * s ** (beta - 1.0)


def cusp_wall(spec, side, s, s_max=np.inf):
    """Evaluate one wall of a cusp local model.

    Returns ``(z, z')`` with ``z = c_side * s**beta / beta``.  ``side`` is
    ``"plus"`` or ``"minus"``; ``s`` must lie in ``[0, s_max]``.
    """
    if side == "plus":
        c = spec.c_plus
    elif side == "minus":
        c = spec.c_minus
    else:
        raise GeometryError(f"side must be 'plus' or 'minus', got {side!r}")
    if not (0.0 <= s <= s_max):
        raise GeometryError(f"s={s} outside wall range [0, {s_max}]")
    return wall_profile(c, spec.beta, s)


def wall_arclen(c, beta, s):
    """Arclength of the wall graph from the vertex to coordinate s.

    Uses the binomial series of sqrt(1 + c^2 u^(2b-2)) near the vertex and
    Gauss-Legendre panels elsewhere; absolute accuracy ~1e-14.
    """
    if s <= 0.0:
        return 0.0
    q = (c * s ** (beta - 1.0)) ** 2
    if q < 0.09:
        # integral of the binomial series of sqrt(1+q(u)) term by term
        p = 2.0 * beta - 2.0
        total = s
        coeff = 1.0
        qk = 1.0
        for k in range(1, 30):
            coeff *= (0.5 - (k - 1)) / k
            qk *= q
            term = coeff * qk * s / (p * k + 1.0)
            total += term
            if abs(term) < 1e-17 * s:
                break
        return total
    total = 0.0
    edges = np.linspace(0.0, s, 5)
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(
            _GL_WEIGHTS * np.sqrt(1.0 + (c * u ** (beta - 1.0)) ** 2)
        )
    return total


def wall_arclen_inv(c, beta, ell):
    """Inverse of wall_arclen: wall coordinate s at arclength ell from the vertex."""
    if ell <= 0.0:
        return 0.0
    s = ell
    for _ in range(60):
        f = wall_arclen(c, beta, s) - ell
        df = np.sqrt(1.0 + (c * s ** (beta - 1.0)) ** 2)
        step = f / df
        s -= step
        if s <= 0.0:
            s = ell * 1e-3
        if abs(step) < 1e-15 * max(1.0, ell):
            break
    return s


def _rot90(v):
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class CuspSpec:
    """One cusp at a flat point: flatness exponent and per-side coefficients."""

    label: int
    beta: float
    c_plus: float
    c_minus: float
    epsilon: float
    vertex_abscissa: float = np.nan

    def __post_init__(self):
        if self.beta < 2.0:
            raise GeometryError(f"cusp flatness beta={self.beta} must be >= 2")
        if self.c_plus < 0 or self.c_minus < 0:
            raise GeometryError("wall coefficients must be nonnegative")
        if self.c_plus == 0 and self.c_minus == 0:
            raise GeometryError("wall coefficients must not both vanish")
        if self.epsilon <= 0:
            raise GeometryError("cusp neighborhood radius must be positive")

    @property
    def c_bar(self):
        return 0.5 * (self.c_plus + self.c_minus)


@dataclass(frozen=True)
class WallPiece:
    """Graph of the cusp local model, traversed along the table boundary.

    ``side=+1`` is the local upper wall (z = +c s^b / b), ``side=-1`` the
    lower one.  ``orient=+1`` means r increases from the vertex outward.
    """

    vertex: tuple
    axis: tuple  # unit vector from the vertex into the table
    side: int
    c: float
    beta: float
    smax: float
    orient: int
    cusp_label: int

    kind = "cusp_wall"

    @property
    def length(self):
        return wall_arclen(self.c, self.beta, self.smax)

    def _frame(self):
        e1 = np.asarray(self.axis, dtype=float)
        return e1, _rot90(e1)

    def point(self, s):
        e1, e2 = self._frame()
        z, _ = wall_profile(self.c, self.beta, s)
        return np.asarray(self.vertex) + s * e1 + self.side * z * e2

    def tangent(self, s):
        e1, e2 = self._frame()
        _, zp = wall_profile(self.c, self.beta, s)
        t = e1 + self.side * zp * e2
        return self.orient * t / np.hypot(1.0, zp)

    def curvature(self, s):
        zp = self.c * s ** (self.beta - 1.0)
        zpp = self.c * (self.beta - 1.0) * s ** (self.beta - 2.0) if s > 0 else (
            self.c if self.beta == 2.0 else 0.0
        )
        return zpp / (1.0 + zp * zp) ** 1.5

    def s_from_local(self, ell):
        """Wall coordinate from the arclength offset along the traversal."""
        if self.orient > 0:
            return wall_arclen_inv(self.c, self.beta, ell)
        return wall_arclen_inv(self.c, self.beta, self.length - ell)

    def local_from_s(self, s):
        ell = wall_arclen(self.c, self.beta, s)
        return ell if self.orient > 0 else self.length - ell


@dataclass(frozen=True)
class ArcPiece:
    """Dispersing circular arc; traversal runs counterclockwise about its own
    center, which is the clockwise direction around the table."""

    center: tuple
    radius: float
    theta0: float
    sweep: float  # > 0

    kind = "circular_arc"

    def __post_init__(self):
        if self.radius <= 0 or self.sweep <= 0:
            raise GeometryError("arc needs positive radius and sweep")

    @property
    def length(self):
        return self.radius * self.sweep

    def point(self, u):
        th = self.theta0 + u
        return np.asarray(self.center) + self.radius * np.array(
            [np.cos(th), np.sin(th)]
        )

    def tangent(self, u):
        th = self.theta0 + u
        return np.array([-np.sin(th), np.cos(th)])

    def curvature(self, u):
        return 1.0 / self.radius


@dataclass(frozen=True)
class TableSpec:
    """A validated-or-validatable billiard table."""

    pieces: tuple
    cusps: tuple
    name: str = "table"

    @property
    def piece_lengths(self):
        return np.array([p.length for p in self.pieces])

    @property
    def r_offsets(self):
        return np.concatenate([[0.0], np.cumsum(self.piece_lengths)])[:-1]

    @property
    def perimeter(self):
        return float(np.sum(self.piece_lengths))

    @property
    def beta_star(self):
        return max(c.beta for c in self.cusps)

    @property
    def alpha(self):
        bs = self.beta_star
        if bs <= 2.0:
            raise GeometryError("beta_star must exceed 2 for a stable limit index")
        return bs / (bs - 1.0)

    @property
    def j_star(self):
        bs = self.beta_star
        return tuple(c.label for c in self.cusps if c.beta == bs)

    def cusp(self, label):
        for c in self.cusps:
            if c.label == label:
                return c
        raise KeyError(label)

    def cusp_intervals(self, epsilon=None):
        """Abscissa intervals |r - r_i| < eps_i, one (lo, hi) pair per cusp.

        Intervals may wrap; they are returned unwrapped (lo may be negative).
        """
        out = []
        for c in self.cusps:
            eps = c.epsilon if epsilon is None else epsilon
            out.append((c.vertex_abscissa - eps, c.vertex_abscissa + eps))
        return out

    def m_fraction(self):
        """mu(M): measure of the boundary outside all cusp neighborhoods."""
        removed = sum(hi - lo for lo, hi in self.cusp_intervals())
        return 1.0 - removed / self.perimeter


def piece_at(table, r, tol=1e-12):
    """Piece index and local arclength offset for abscissa r (mod perimeter)."""
    perim = table.perimeter
    r = float(r) % perim
    offs = table.r_offsets
    lens = table.piece_lengths
    idx = int(np.searchsorted(offs, r, side="right") - 1)
    ell = r - offs[idx]
    scale = tol * perim
    if ell < scale or lens[idx] - ell < scale:
        raise SingularPointError(f"abscissa r={r} lies on a piece junction")
    return idx, ell


def boundary_at(table, r):
    """Point, traversal tangent, inward normal and curvature at abscissa r."""
    idx, ell = piece_at(table, r)
    p = table.pieces[idx]
    if p.kind == "cusp_wall":
        s = p.s_from_local(ell)
        pt, tg, kappa = p.point(s), p.tangent(s), p.curvature(s)
    else:
        u = ell / p.radius
        pt, tg, kappa = p.point(u), p.tangent(u), p.curvature(u)
    n = np.array([tg[1], -tg[0]])
    return pt, tg, n, kappa


def abscissa_of(table, point, r_hint=None):
    """Abscissa of a boundary point (inverse of boundary_at, for tests)."""
    point = np.asarray(point, dtype=float)
    best = None
    for idx, p in enumerate(table.pieces):
        if p.kind == "circular_arc":
            d = point - np.asarray(p.center)
            th = np.arctan2(d[1], d[0])
            u = (th - p.theta0) % (2 * np.pi)
            if u > p.sweep:
                if u - p.sweep < 2 * np.pi - u:
                    u = p.sweep
                else:
                    u = 0.0
            cand = p.point(u)
            dist = np.hypot(*(cand - point))
            ell = u * p.radius
        else:
            e1, e2 = p._frame()
            q = point - np.asarray(p.vertex)
            s = float(np.clip(q @ e1, 0.0, p.smax))
            for _ in range(60):  # Newton on (P(s)-x).P'(s) = 0
                z, zp = wall_profile(p.c, p.beta, s)
                rvec = s * e1 + p.side * z * e2 - q
                dP = e1 + p.side * zp * e2
                g = rvec @ dP
                zpp = p.c * (p.beta - 1.0) * s ** (p.beta - 2.0) if s > 0 else 0.0
                dg = dP @ dP + rvec @ (p.side * zpp * e2)
                if dg == 0:
                    break
                step = g / dg
                s = float(np.clip(s - step, 0.0, p.smax))
                if abs(step) < 1e-15 * max(1.0, p.smax):
                    break
            cand = p.point(s)
            dist = np.hypot(*(cand - point))
            ell = p.local_from_s(s)
        r = table.r_offsets[idx] + ell
        if best is None or dist < best[0]:
            best = (dist, r)
    return best[1] % table.perimeter


def _arc_through(p0, p1, sagitta, inward):
    """Arc from p0 to p1 bulging by `sagitta` toward the side of `inward`.

    Traversal p0 -> p1 must run counterclockwise about the arc center; a
    GeometryError is raised otherwise (the piece would be focusing).
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    inward = np.asarray(inward, dtype=float)
    chord = p1 - p0
    L = np.hypot(*chord)
    if L == 0:
        raise GeometryError("arc endpoints coincide")
    mid = 0.5 * (p0 + p1)
    perp = _rot90(chord / L)
    if (inward - mid) @ perp < 0:
        perp = -perp
    apex = mid + sagitta * perp
    # circumcenter of (p0, apex, p1)
    ax, ay = p0
    bx, by = apex
    cx, cy = p1
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-14:
        raise GeometryError("degenerate arc (collinear points)")
    ux = (
        (ax * ax + ay * ay) * (by - cy)
        + (bx * bx + by * by) * (cy - ay)
        + (cx * cx + cy * cy) * (ay - by)
    ) / d
    uy = (
        (ax * ax + ay * ay) * (cx - bx)
        + (bx * bx + by * by) * (ax - cx)
        + (cx * cx + cy * cy) * (bx - ax)
    ) / d
    center = np.array([ux, uy])
    radius = np.hypot(*(p0 - center))
    th0 = np.arctan2(p0[1] - uy, p0[0] - ux)
    th1 = np.arctan2(p1[1] - uy, p1[0] - ux)
    tha = np.arctan2(apex[1] - uy, apex[0] - ux)
    sweep = (th1 - th0) % (2 * np.pi)
    if (tha - th0) % (2 * np.pi) > sweep:
        raise GeometryError(
            "arc would be traversed clockwise about its center (focusing side)"
        )
    return ArcPiece(center=(ux, uy), radius=radius, theta0=th0, sweep=sweep)


def _wall_pair(vertex, axis, beta, c_plus, c_minus, length):
    """Upper and lower wall pieces of one cusp (clockwise order convention:
    lower wall is traversed toward the vertex, upper away from it)."""
    upper = WallPiece(
        vertex=tuple(vertex), axis=tuple(axis), side=+1,
        c=c_plus, beta=beta, smax=length, orient=+1, cusp_label=-1,
    )
    lower = WallPiece(
        vertex=tuple(vertex), axis=tuple(axis), side=-1,
        c=c_minus, beta=beta, smax=length, orient=-1, cusp_label=-1,
    )
    return upper, lower


def _assemble(pieces, cusp_params, name):
    """Fill vertex abscissas and wall labels, return the TableSpec."""
    pieces = list(pieces)
    offs = np.concatenate([[0.0], np.cumsum([p.length for p in pieces])])
    cusps = []
    for pos, (beta, cp, cm, eps, wall_idx_upper) in enumerate(cusp_params):
        label = pos + 1  # label 0 is reserved for the no-cusp return class
        # the vertex sits at the junction where the upper wall starts
        r_vertex = offs[wall_idx_upper] % offs[-1]
        cusps.append(
            CuspSpec(
                label=label, beta=beta, c_plus=cp, c_minus=cm,
                epsilon=eps, vertex_abscissa=float(r_vertex),
            )
        )
        for idx in (wall_idx_upper, (wall_idx_upper - 1) % len(pieces)):
            pieces[idx] = dataclasses.replace(pieces[idx], cusp_label=label)
    for c in cusps:
        for p in pieces:
            if p.kind == "cusp_wall" and p.cusp_label == c.label:
                if wall_arclen(p.c, p.beta, p.smax) < c.epsilon:
                    raise GeometryError("cusp neighborhood larger than its wall")
    return TableSpec(pieces=tuple(pieces), cusps=tuple(cusps), name=name)


def build_one_cusp_table(
    beta=3.0,
    c_plus=1.0,
    c_minus=1.0,
    wall_length=1.5,
    epsilon=0.15,
    dome_x=3.3,
    dome_y=1.9,
    east_x=4.1,
    sagitta=0.35,
    name="one_cusp",
):
    """Table with a single cusp at the origin opening along +x, closed by a
    three-arc dome with four standard corners."""
    if not (beta >= 2.0):
        raise GeometryError("beta must be >= 2")
    upper, lower = _wall_pair((0.0, 0.0), (1.0, 0.0), beta, c_plus, c_minus, wall_length)
    e_up = upper.point(wall_length)
    e_lo = lower.point(wall_length)
    k1 = np.array([dome_x, dome_y])
    k2 = np.array([dome_x, -dome_y])
    interior = np.array([1.8, 0.0])
    arcs = [
        _arc_through(e_up, k1, sagitta, interior),
        _arc_through(k1, np.array([east_x, 0.0]), sagitta, interior),
        _arc_through(np.array([east_x, 0.0]), k2, sagitta, interior),
        _arc_through(k2, e_lo, sagitta, interior),
    ]
    pieces = [upper] + arcs + [lower]
    table = _assemble(pieces, [(beta, c_plus, c_minus, epsilon, 0)], name)
    return table


def build_two_cusp_table(
    beta_a=3.0,
    c_a_plus=1.0,
    c_a_minus=1.0,
    beta_b=3.0,
    c_b_plus=1.0,
    c_b_minus=1.0,
    wall_length=1.5,
    epsilon=0.15,
    separation=5.0,
    offset=1.5,
    dome_lift=1.3,
    sagitta=0.3,
    name="two_cusp",
):
    """Table with cusp A at the origin opening along +x and cusp B at
    (separation, offset) opening along -x; two dome chains close it."""
    for b in (beta_a, beta_b):
        if not (b >= 2.0):
            raise GeometryError("beta must be >= 2")
    if max(beta_a, beta_b) <= 2.0:
        raise GeometryError("at least one cusp must have beta > 2")
    a_up, a_lo = _wall_pair((0.0, 0.0), (1.0, 0.0), beta_a, c_a_plus, c_a_minus, wall_length)
    bx, by = separation, offset
    b_up, b_lo = _wall_pair((bx, by), (-1.0, 0.0), beta_b, c_b_plus, c_b_minus, wall_length)

    e_a_up = a_up.point(wall_length)          # end of A's upper wall
    e_a_lo = a_lo.point(wall_length)
    e_b_up = b_lo.point(wall_length)          # B local-minus wall is globally upper
    e_b_lo = b_up.point(wall_length)
    top_peak = np.array([
        0.5 * (e_a_up[0] + e_b_up[0]),
        max(e_a_up[1], e_b_up[1]) + dome_lift,
    ])
    bot_peak = np.array([
        0.5 * (e_a_lo[0] + e_b_lo[0]),
        min(e_a_lo[1], e_b_lo[1]) - dome_lift,
    ])
    interior = np.array([0.5 * separation, 0.5 * offset])
    top_arcs = [
        _arc_through(e_a_up, top_peak, sagitta, interior),
        _arc_through(top_peak, e_b_up, sagitta, interior),
    ]
    bot_arcs = [
        _arc_through(e_b_lo, bot_peak, sagitta, interior),
        _arc_through(bot_peak, e_a_lo, sagitta, interior),
    ]
    # clockwise: A upper wall, top chain, B upper(global) wall in toward B,
    # B lower wall out, bottom chain, A lower wall back to the A vertex.
    pieces = [a_up] + top_arcs + [b_lo, b_up] + bot_arcs + [a_lo]
    cusp_params = [
        (beta_a, c_a_plus, c_a_minus, epsilon, 0),
        (beta_b, c_b_plus, c_b_minus, epsilon, 4),
    ]
    return _assemble(pieces, cusp_params, name)


@dataclass
class ValidationReport:
    checks: dict

    @property
    def ok(self):
        return all(v["passed"] for v in self.checks.values())

    def summary(self):
        lines = []
        for k, v in self.checks.items():
            lines.append(f"{'PASS' if v['passed'] else 'FAIL'} {k}: {v['detail']}")
        return "\n".join(lines)


def _densify(table, pts_per_piece=400):
    pts = []
    for p in table.pieces:
        if p.kind == "circular_arc":
            us = np.linspace(0, p.sweep, pts_per_piece, endpoint=False)
            pts.extend(p.point(u) for u in us)
        else:
            # quadratic spacing toward the vertex resolves the flat point
            ss = p.smax * np.linspace(0, 1, pts_per_piece) ** 2
            if p.orient < 0:
                ss = ss[::-1]
            pts.extend(p.point(s) for s in ss[:-1])
    return np.array(pts)


def validate_table(table, n_rays=24, n_wall_samples=18):
    """Run the geometric validity checks and return a ValidationReport.

    Checks: (a) dispersing curvature off cusp walls, (b) one-bounce
    separation of cusp neighborhoods, (c) tangent exit rays land outside all
    neighborhoods, (d) junctions are honest corners or cusp vertices,
    (e) simple (non-self-intersecting) boundary.
    """
    from . import _kernel

    checks = {}

    # (a) curvature
    kappa_min = np.inf
    wall_ok = True
    for p in table.pieces:
        if p.kind == "circular_arc":
            kappa_min = min(kappa_min, 1.0 / p.radius)
        else:
            for s in np.linspace(0, p.smax, 50):
                if p.curvature(s) < -1e-12:
                    wall_ok = False
    checks["dispersing_curvature"] = {
        "passed": bool(kappa_min > 0 and wall_ok),
        "detail": f"min arc curvature {kappa_min:.3g}; walls nonnegative: {wall_ok}",
    }

    packed = _kernel.pack_table(table)

    def _first_hit(pt, dvec):
        return _kernel.ray_first_hit(*packed, pt[0], pt[1], dvec[0], dvec[1], -1, 0.0)

    # (b) pairwise neighborhood separation by ray casting between wall samples
    sep_ok, sep_detail = True, "no cusp pair reachable in one bounce"
    wall_pieces = [
        (i, p) for i, p in enumerate(table.pieces) if p.kind == "cusp_wall"
    ]
    for ia, pa in wall_pieces:
        ca = table.cusp(pa.cusp_label)
        sa = wall_arclen_inv(pa.c, pa.beta, ca.epsilon)
        for ib, pb in wall_pieces:
            if pb.cusp_label == pa.cusp_label:
                continue
            cb = table.cusp(pb.cusp_label)
            sb = wall_arclen_inv(pb.c, pb.beta, cb.epsilon)
            frac = np.linspace(0.05, 0.999, n_wall_samples)
            for fa in frac:
                x0 = pa.point(fa * sa)
                for fb in frac:
                    x1 = pb.point(fb * sb)
                    d = x1 - x0
                    dist = np.hypot(*d)
                    d = d / dist
                    hit = _first_hit(x0 + 1e-11 * d, d)
                    if hit[0] >= 0 and hit[3] > dist - 1e-7:
                        sep_ok = False
                        sep_detail = (
                            f"direct flight cusp {pa.cusp_label}->{pb.cusp_label}"
                            f" at s={fa * sa:.4f}->{fb * sb:.4f}"
                        )
    checks["neighborhood_separation"] = {"passed": sep_ok, "detail": sep_detail}

    # (c) tangent trajectory out of each cusp
    tan_ok, tan_detail = True, "tangent exits land outside all neighborhoods"
    for c in table.cusps:
        for p in table.pieces:
            if p.kind == "cusp_wall" and p.cusp_label == c.label and p.side > 0:
                v = np.asarray(p.vertex, dtype=float)
                ax = np.asarray(p.axis, dtype=float)
                hit = _first_hit(v + 1e-9 * ax, ax)
                if hit[0] < 0:
                    tan_ok, tan_detail = False, f"tangent ray from cusp {c.label} escaped"
                    continue
                piece_idx = int(hit[0])
                hp = table.pieces[piece_idx]
                if hp.kind == "cusp_wall":
                    lbl = hp.cusp_label
                    s_hit = hit[1]
                    eps_s = wall_arclen_inv(hp.c, hp.beta, table.cusp(lbl).epsilon)
                    if s_hit < eps_s:
                        tan_ok = False
                        tan_detail = (
                            f"tangent ray from cusp {c.label} lands inside"
                            f" neighborhood of cusp {lbl}"
                        )
                break
    checks["tangent_exit"] = {"passed": tan_ok, "detail": tan_detail}

    # (d) joins: corner (tangents differ) or cusp vertex (tangents opposite)
    join_ok, join_detail = True, "all junctions are corners or cusp vertices"
    n = len(table.pieces)
    for i in range(n):
        p, q = table.pieces[i], table.pieces[(i + 1) % n]
        if p.kind == "cusp_wall":
            end_t = p.tangent(p.smax if p.orient > 0 else 0.0)
            end_pt = p.point(p.smax if p.orient > 0 else 0.0)
        else:
            end_t, end_pt = p.tangent(p.sweep), p.point(p.sweep)
        if q.kind == "cusp_wall":
            beg_t = q.tangent(0.0 if q.orient > 0 else q.smax)
            beg_pt = q.point(0.0 if q.orient > 0 else q.smax)
        else:
            beg_t, beg_pt = q.tangent(0.0), q.point(0.0)
        if np.hypot(*(end_pt - beg_pt)) > 1e-9:
            join_ok, join_detail = False, f"pieces {i},{(i + 1) % n} do not meet"
            continue
        cosang = float(np.clip(end_t @ beg_t, -1, 1))
        is_vertex = (
            p.kind == "cusp_wall"
            and q.kind == "cusp_wall"
            and p.cusp_label == q.cusp_label
        )
        if is_vertex:
            if cosang > -1 + 1e-9:
                join_ok, join_detail = False, f"cusp vertex at junction {i} not tangential"
        elif cosang > 1 - 1e-8:
            join_ok, join_detail = False, f"tangential non-cusp join at junction {i}"
    checks["joins"] = {"passed": join_ok, "detail": join_detail}

    # (e) simple boundary
    try:
        from shapely.geometry import Polygon

        poly = Polygon(_densify(table))
        simple = poly.is_valid
        detail = "boundary polygonization is simple" if simple else "self-intersection"
    except Exception as exc:  # pragma: no cover
        simple, detail = True, f"shapely unavailable ({exc}); skipped"
    checks["simple_boundary"] = {"passed": bool(simple), "detail": detail}

    return ValidationReport(checks=checks)
