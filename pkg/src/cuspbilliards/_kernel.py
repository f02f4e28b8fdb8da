"""Compiled stepping kernel for the billiard map.

Tables are packed into flat arrays so the inner loops run under numba.
Piece parameter rows (``pp``):

* arc:  [cx, cy, R, theta0, sweep, -,    -,    -,    -,     -,      bx, by, brad]
* wall: [vx, vy, ax, ay,    side,  c,    beta, smax, s_eps, orient, bx, by, brad]

``(bx, by, brad)`` is a bounding circle used to prune ray tests.  Wall
intersections against the ray reduce to the scalar equation
``G(t) = side*y(t) - w(x(t)) = 0`` in cusp-local coordinates; G is concave
(upper wall) so it has at most two roots and safeguarded bisection-Newton
is exact.  A post-collision ray can never re-hit its own wall piece: it
starts on the graph of a convex function and immediately enters the
epigraph complement, where the chord always stays.
"""

import numpy as np
from numba import njit

# step/return status codes
OK = 0
GRAZE = 1
CORNER = 2
VERTEX = 3
NOHIT = 4

T_MIN = 1e-13
CORNER_TOL = 1e-11
VERTEX_TOL = 1e-13
GRAZE_TOL = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def pack_table(table):
    """Flatten a TableSpec into kernel arrays."""
    from .geometry import wall_arclen_inv

    n = len(table.pieces)
    ptype = np.zeros(n, dtype=np.int64)
    pp = np.zeros((n, 13))
    wlabel = -np.ones(n, dtype=np.int64)
    for i, p in enumerate(table.pieces):
        if p.kind == "circular_arc":
            pp[i, 0:5] = (p.center[0], p.center[1], p.radius, p.theta0, p.sweep)
            pts = [p.point(u) for u in np.linspace(0, p.sweep, 9)]
        else:
            ptype[i] = 1
            eps = table.cusp(p.cusp_label).epsilon
            s_eps = wall_arclen_inv(p.c, p.beta, eps)
            pp[i, 0:10] = (
                p.vertex[0], p.vertex[1], p.axis[0], p.axis[1],
                float(p.side), p.c, p.beta, p.smax, s_eps, float(p.orient),
            )
            wlabel[i] = p.cusp_label
            pts = [p.point(s) for s in np.linspace(0, p.smax, 9)]
        pts = np.array(pts)
        c = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
        rad = np.max(np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]))
        # pad the bound: the arc/wall bulges at most its own sagitta beyond
        # the sampled polyline chord midpoints
        pp[i, 10:13] = (c[0], c[1], rad * 1.05 + 1e-9)
    plen = np.array([p.length for p in table.pieces])
    poff = np.concatenate([[0.0], np.cumsum(plen)])[:-1]
    return ptype, pp, plen, poff, float(table.perimeter), wlabel


@njit(cache=True, inline="always")
def _wall_w(c, beta, s):
    if s <= 0.0:
        return 0.0
    return c * s**beta / beta


@njit(cache=True, inline="always")
def _wall_wp(c, beta, s):
    if s <= 0.0:
        return 0.0
    return c * s ** (beta - 1.0)


@njit(cache=True)
def wall_arclen(c, beta, s):
    if s <= 0.0:
        return 0.0
    q = (c * s ** (beta - 1.0)) ** 2
    if q < 0.09:
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
    h = s / 4.0
    for panel in range(4):
        a = panel * h
        for i in range(_GL_NODES.shape[0]):
            u = a + 0.5 * h * (_GL_NODES[i] + 1.0)
            total += 0.5 * h * _GL_WEIGHTS[i] * np.sqrt(
                1.0 + (c * u ** (beta - 1.0)) ** 2
            )
    return total


@njit(cache=True)
def wall_arclen_inv(c, beta, ell):
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
        if abs(step) < 1e-15 * (1.0 if ell < 1.0 else ell):
            break
    return s


@njit(cache=True)
def point_of(ptype, pp, piece, param):
    """Global coordinates of the collision (piece, param)."""
    if ptype[piece] == 0:
        th = pp[piece, 3] + param
        return (
            pp[piece, 0] + pp[piece, 2] * np.cos(th),
            pp[piece, 1] + pp[piece, 2] * np.sin(th),
        )
    vx, vy, ax, ay = pp[piece, 0], pp[piece, 1], pp[piece, 2], pp[piece, 3]
    side, c, beta = pp[piece, 4], pp[piece, 5], pp[piece, 6]
    z = side * _wall_w(c, beta, param)
    # e2 = rot90(axis) = (-ay, ax)
    return vx + param * ax - z * ay, vy + param * ay + z * ax


@njit(cache=True)
def frame_of(ptype, pp, piece, param):
    """Traversal tangent and inward normal at (piece, param)."""
    if ptype[piece] == 0:
        th = pp[piece, 3] + param
        tx, ty = -np.sin(th), np.cos(th)
        return tx, ty, ty, -tx
    ax, ay = pp[piece, 2], pp[piece, 3]
    side, c, beta = pp[piece, 4], pp[piece, 5], pp[piece, 6]
    orient = pp[piece, 9]
    zp = side * _wall_wp(c, beta, param)
    nrm = np.sqrt(1.0 + zp * zp)
    # local traversal tangent (1, zp)/nrm * orient, rotated to global
    lx, ly = orient / nrm, orient * zp / nrm
    tx = lx * ax - ly * ay
    ty = lx * ay + ly * ax
    return tx, ty, ty, -tx


@njit(cache=True)
def _wall_G(eta, c, beta, x0, y0, u, v, t):
    s = x0 + u * t
    return eta * (y0 + v * t) - _wall_w(c, beta, s)


@njit(cache=True)
def _wall_root(eta, c, beta, x0, y0, u, v, ta, tb):
    """First root of G on [ta, tb] given G(ta) and G(tb) straddle or the
    bracket was prepared by the caller.  Safeguarded bisection-Newton."""
    fa = _wall_G(eta, c, beta, x0, y0, u, v, ta)
    t = 0.5 * (ta + tb)
    for _ in range(100):
        f = _wall_G(eta, c, beta, x0, y0, u, v, t)
        if (f > 0.0) == (fa > 0.0):
            ta = t
            fa = f
        else:
            tb = t
        s = x0 + u * t
        df = eta * v - u * _wall_wp(c, beta, s)
        tn = t - f / df if df != 0.0 else -1.0
        if ta < tn < tb:
            t = tn
        else:
            t = 0.5 * (ta + tb)
        if tb - ta < 1e-16 * (1.0 + abs(t)):
            break
    return t


@njit(cache=True)
def ray_wall_hit_local(eta, c, beta, smax, x0, y0, u, v, tmin, tcap):
    """Smallest t in [tmin, tcap] with the local ray on the wall graph.

    Returns (t, s); t = inf when there is no intersection.
    """
    inf = np.inf
    if u > 1e-300:
        ta = -x0 / u
        tb = (smax - x0) / u
    elif u < -1e-300:
        ta = (smax - x0) / u
        tb = -x0 / u
    else:
        if x0 < 0.0 or x0 > smax:
            return inf, 0.0
        ta, tb = tmin, tcap
    if ta < tmin:
        ta = tmin
    if tb > tcap:
        tb = tcap
    if not (ta < tb):
        return inf, 0.0
    Ga = _wall_G(eta, c, beta, x0, y0, u, v, ta)
    Gb = _wall_G(eta, c, beta, x0, y0, u, v, tb)
    # interior stationary point of the concave G, if any
    tstar = -1.0
    if c > 0.0 and abs(u) > 1e-300:
        w = eta * v / (u * c)
        if w > 0.0:
            sstar = w ** (1.0 / (beta - 1.0))
            ts = (sstar - x0) / u
            if ta < ts < tb:
                tstar = ts
    if Ga > 0.0:
        if Gb > 0.0:
            return inf, 0.0
        lo = ta
        if tstar > 0.0 and _wall_G(eta, c, beta, x0, y0, u, v, tstar) > 0.0:
            lo = tstar
        t = _wall_root(eta, c, beta, x0, y0, u, v, lo, tb)
    else:
        if tstar > 0.0:
            Gs = _wall_G(eta, c, beta, x0, y0, u, v, tstar)
            if Gs <= 0.0:
                return inf, 0.0
            t = _wall_root(eta, c, beta, x0, y0, u, v, ta, tstar)
        else:
            if Gb <= 0.0:
                return inf, 0.0
            t = _wall_root(eta, c, beta, x0, y0, u, v, ta, tb)
    return t, x0 + u * t


@njit(cache=True)
def ray_arc_hit(cx, cy, R, theta0, sweep, px, py, dx, dy, tmin, tcap, on_this):
    """Smallest valid t hitting the arc; returns (t, u) with u the angular
    offset from theta0, or (inf, 0)."""
    inf = np.inf
    qx, qy = px - cx, py - cy
    b = qx * dx + qy * dy
    c0 = qx * qx + qy * qy - R * R
    best_t, best_u = inf, 0.0
    if on_this:
        t1 = -2.0 * b
        cand0, cand1 = t1, inf
    else:
        disc = b * b - c0
        if disc <= 0.0:
            return inf, 0.0
        sq = np.sqrt(disc)
        # stable quadratic roots
        if b >= 0.0:
            r1 = -b - sq
        else:
            r1 = -b + sq
        r2 = c0 / r1 if r1 != 0.0 else inf
        cand0, cand1 = min(r1, r2), max(r1, r2)
    for k in range(2):
        t = cand0 if k == 0 else cand1
        if not (tmin <= t < min(tcap, best_t)):
            continue
        hx, hy = qx + t * dx, qy + t * dy
        th = np.arctan2(hy, hx)
        u = (th - theta0) % (2.0 * np.pi)
        if u <= sweep:
            best_t, best_u = t, u
    return best_t, best_u


@njit(cache=True)
def ray_first_hit(ptype, pp, plen, poff, perim, wlabel, px, py, dx, dy,
                  cur_piece, cur_param):
    """First boundary intersection of the ray from (px, py) along (dx, dy).

    Returns (piece, param, status, t).  cur_piece = -1 means the ray starts
    off the boundary (used by validation); otherwise the current piece is
    handled with exact self-intersection rules, and wall pieces of the same
    cusp are solved in local coordinates.
    """
    n = ptype.shape[0]
    best_t = np.inf
    best_piece = -1
    best_param = 0.0
    cur_is_wall = cur_piece >= 0 and ptype[cur_piece] == 1
    for j in range(n):
        # bounding-circle prune
        bx, by, br = pp[j, 10], pp[j, 11], pp[j, 12]
        ex, ey = bx - px, by - py
        along = ex * dx + ey * dy
        d2 = ex * ex + ey * ey
        if d2 > br * br:  # outside the bound: must head toward it
            perp2 = d2 - along * along
            if along < 0.0 or perp2 > br * br:
                continue
            if along - br > best_t:
                continue
        if ptype[j] == 0:
            t, u = ray_arc_hit(
                pp[j, 0], pp[j, 1], pp[j, 2], pp[j, 3], pp[j, 4],
                px, py, dx, dy, T_MIN, best_t, j == cur_piece,
            )
            if t < best_t:
                best_t, best_piece, best_param = t, j, u
        else:
            if j == cur_piece:
                continue  # self-rehit impossible on a convex wall graph
            vx, vy, ax, ay = pp[j, 0], pp[j, 1], pp[j, 2], pp[j, 3]
            eta, c, beta, smax = pp[j, 4], pp[j, 5], pp[j, 6], pp[j, 7]
            same_cusp = (
                cur_is_wall
                and wlabel[j] >= 0
                and wlabel[j] == wlabel[cur_piece]
            )
            if same_cusp:
                # exact local start point from the stored wall coordinate
                x0 = cur_param
                y0 = pp[cur_piece, 4] * _wall_w(
                    pp[cur_piece, 5], pp[cur_piece, 6], cur_param
                )
            else:
                qx, qy = px - vx, py - vy
                x0 = qx * ax + qy * ay
                y0 = -qx * ay + qy * ax
            u_l = dx * ax + dy * ay
            v_l = -dx * ay + dy * ax
            t, s = ray_wall_hit_local(eta, c, beta, smax, x0, y0, u_l, v_l,
                                      T_MIN, best_t)
            if t < best_t:
                best_t, best_piece, best_param = t, j, s
    if best_piece < 0:
        return -1, 0.0, NOHIT, 0.0
    status = OK
    if ptype[best_piece] == 1:
        if best_param < VERTEX_TOL:
            status = VERTEX
        elif best_param > pp[best_piece, 7] - CORNER_TOL:
            status = CORNER
    else:
        utol = CORNER_TOL / pp[best_piece, 2]
        if best_param < utol or best_param > pp[best_piece, 4] - utol:
            status = CORNER
    return best_piece, best_param, status, best_t


@njit(cache=True)
def step(ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy):
    """One application of the billiard map.

    Returns (status, piece', param', phi', dx', dy', free_path).
    """
    px, py = point_of(ptype, pp, piece, param)
    j, q, status, t = ray_first_hit(
        ptype, pp, plen, poff, perim, wlabel, px, py, dx, dy, piece, param
    )
    if status != OK:
        return status, j, q, 0.0, 0.0, 0.0, t
    tx, ty, nx, ny = frame_of(ptype, pp, j, q)
    dn = dx * nx + dy * ny
    dt = dx * tx + dy * ty
    if abs(dn) < GRAZE_TOL:
        return GRAZE, j, q, 0.0, 0.0, 0.0, t
    rx = dx - 2.0 * dn * nx
    ry = dy - 2.0 * dn * ny
    phi = np.arctan2(-dn, dt)
    return OK, j, q, phi, rx, ry, t


@njit(cache=True)
def abscissa_of_param(ptype, pp, poff, piece, param):
    """Clockwise abscissa r of the collision (piece, param)."""
    if ptype[piece] == 0:
        return poff[piece] + pp[piece, 2] * param
    c, beta, smax = pp[piece, 5], pp[piece, 6], pp[piece, 7]
    ell = wall_arclen(c, beta, param)
    if pp[piece, 9] > 0.0:
        return poff[piece] + ell
    return poff[piece] + (wall_arclen(c, beta, smax) - ell)


@njit(cache=True)
def param_from_abscissa(ptype, pp, plen, poff, perim, r):
    """Inverse of abscissa_of_param; returns (piece, param)."""
    r = r % perim
    n = ptype.shape[0]
    piece = n - 1
    for j in range(n - 1):
        if r < poff[j + 1]:
            piece = j
            break
    ell = r - poff[piece]
    if ptype[piece] == 0:
        return piece, ell / pp[piece, 2]
    c, beta, smax = pp[piece, 5], pp[piece, 6], pp[piece, 7]
    if pp[piece, 9] > 0.0:
        return piece, wall_arclen_inv(c, beta, ell)
    return piece, wall_arclen_inv(c, beta, plen[piece] - ell)


@njit(cache=True)
def state_from_rphi(ptype, pp, plen, poff, perim, r, phi):
    """Kernel state (piece, param, dx, dy) from a collision (r, phi)."""
    piece, param = param_from_abscissa(ptype, pp, plen, poff, perim, r)
    tx, ty, nx, ny = frame_of(ptype, pp, piece, param)
    dx = np.cos(phi) * tx + np.sin(phi) * nx
    dy = np.cos(phi) * ty + np.sin(phi) * ny
    return piece, param, dx, dy


@njit(cache=True)
def in_cusp_nbhd(ptype, pp, wlabel, piece, param):
    """Cusp label if the collision lies inside a cusp neighborhood, else -1."""
    if ptype[piece] == 1 and param < pp[piece, 8]:
        return wlabel[piece]
    return -1


@njit(cache=True)
def sample_mu_state(ptype, pp, plen, poff, perim):
    """One mu-distributed collision as kernel state (uses numba's RNG)."""
    r = np.random.random() * perim
    phi = np.arccos(1.0 - 2.0 * np.random.random())
    piece, param = param_from_abscissa(ptype, pp, plen, poff, perim, r)
    # nudge off junctions
    if ptype[piece] == 1:
        smax = pp[piece, 7]
        if param < 1e-9:
            param = 1e-9
        elif param > smax - 1e-9:
            param = smax - 1e-9
    else:
        sweep = pp[piece, 4]
        utol = 1e-9 / pp[piece, 2]
        if param < utol:
            param = utol
        elif param > sweep - utol:
            param = sweep - utol
    tx, ty, nx, ny = frame_of(ptype, pp, piece, param)
    dx = np.cos(phi) * tx + np.sin(phi) * nx
    dy = np.cos(phi) * ty + np.sin(phi) * ny
    return piece, param, dx, dy, phi


@njit(cache=True)
def sample_m_state(ptype, pp, plen, poff, perim, wlabel):
    """mu-sample conditioned on the induced base M (rejection)."""
    while True:
        piece, param, dx, dy, phi = sample_mu_state(ptype, pp, plen, poff, perim)
        if in_cusp_nbhd(ptype, pp, wlabel, piece, param) < 0:
            return piece, param, dx, dy, phi


@njit(cache=True)
def run_orbit(ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy,
              nsteps, out_r, out_phi, out_tau):
    """Record nsteps collisions after the initial one; returns (status, done)."""
    for k in range(nsteps):
        status, piece, param, phi, dx, dy, t = step(
            ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy
        )
        if status != OK:
            return status, k
        out_r[k] = abscissa_of_param(ptype, pp, poff, piece, param)
        out_phi[k] = phi
        out_tau[k] = t
    return OK, nsteps


@njit(cache=True)
def obs_eval(okind, oprm, perim, r, phi):
    """Evaluate a packed observable at the collision (r, phi)."""
    v = 0.0
    for i in range(okind.shape[0]):
        k = okind[i]
        if k == 0:  # one-sided bump pair at a cusp vertex
            rc, width, am, ap = oprm[i, 0], oprm[i, 1], oprm[i, 2], oprm[i, 3]
            d = (r - rc) % perim
            if d > 0.5 * perim:
                d -= perim
            if -width < d < width:
                x = d / width
                b = (1.0 - x * x) ** 2
                v += (ap if d > 0.0 else am) * b
        elif k == 1:  # global wave, integer mode
            amp, mode, phase = oprm[i, 0], oprm[i, 1], oprm[i, 2]
            v += amp * np.cos(2.0 * np.pi * mode * r / perim + phase)
        else:  # constant
            v += oprm[i, 0]
    return v


@njit(cache=True)
def run_returns(ptype, pp, plen, poff, perim, wlabel, okind, oprm,
                max_returns, iid, seed, with_fstar,
                out_R, out_label, out_ftilde, out_fstar,
                out_start_r, out_start_phi):
    """Generate first-return records.

    iid=1: each record starts from a fresh mu|M sample.  iid=0: records are
    consecutive returns of a single F-orbit.  Singular orbits are discarded
    and resampled; the count of discards is returned with the status.
    """
    np.random.seed(seed)
    discards = 0
    filled = 0
    piece, param, dx, dy, phi = sample_m_state(ptype, pp, plen, poff, perim, wlabel)
    while filled < max_returns:
        if iid == 1:
            piece, param, dx, dy, phi = sample_m_state(
                ptype, pp, plen, poff, perim, wlabel
            )
        r0 = abscissa_of_param(ptype, pp, poff, piece, param)
        phi0 = phi
        # streaming Birkhoff sums along the excursion
        S = 0.0
        run_max = 0.0  # running max/min of partial sums S_l, l = 0..R
        run_min = 0.0
        best_a = 0.0  # max over l'<=l of (S_l' - S_l)
        best_b = 0.0
        label = -2
        R = 0
        failed = False
        p_i, p_p, p_dx, p_dy = piece, param, dx, dy
        while True:
            f_here = obs_eval(okind, oprm, perim,
                              abscissa_of_param(ptype, pp, poff, p_i, p_p), phi)
            S += f_here
            status, p_i, p_p, phi, p_dx, p_dy, t = step(
                ptype, pp, plen, poff, perim, wlabel, p_i, p_p, p_dx, p_dy
            )
            if status != OK:
                failed = True
                break
            R += 1
            if with_fstar == 1:
                if S > run_max:
                    run_max = S
                if S < run_min:
                    run_min = S
                a = run_max - S
                b = S - run_min
                if a > best_a:
                    best_a = a
                if b > best_b:
                    best_b = b
            lbl = in_cusp_nbhd(ptype, pp, wlabel, p_i, p_p)
            if lbl < 0:
                if label == -2:
                    label = -1  # returned without entering any cusp
                break
            if label == -2:
                label = lbl
        if failed:
            discards += 1
            piece, param, dx, dy, phi = sample_m_state(
                ptype, pp, plen, poff, perim, wlabel
            )
            continue
        out_R[filled] = R
        out_label[filled] = label if label >= 1 else 0
        out_ftilde[filled] = S
        out_fstar[filled] = min(best_a, best_b)
        out_start_r[filled] = r0
        out_start_phi[filled] = phi0
        filled += 1
        piece, param, dx, dy = p_i, p_p, p_dx, p_dy
    return discards


@njit(cache=True)
def run_birkhoff(ptype, pp, plen, poff, perim, wlabel, okind, oprm,
                 n, reps, seed, out_sums):
    """reps independent values of S_n f from fresh mu starts."""
    np.random.seed(seed)
    discards = 0
    k = 0
    while k < reps:
        piece, param, dx, dy, phi = sample_mu_state(ptype, pp, plen, poff, perim)
        S = 0.0
        ok = True
        for _ in range(n):
            r = abscissa_of_param(ptype, pp, poff, piece, param)
            S += obs_eval(okind, oprm, perim, r, phi)
            status, piece, param, phi, dx, dy, t = step(
                ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy
            )
            if status != OK:
                ok = False
                break
        if ok:
            out_sums[k] = S
            k += 1
        else:
            discards += 1
    return discards


@njit(cache=True)
def run_observable_series(ptype, pp, plen, poff, perim, wlabel, okind, oprm,
                          n, seed, out_vals):
    """One orbit's observable values f(T^j x), j = 0..n-1, from a mu start."""
    np.random.seed(seed)
    discards = 0
    while True:
        piece, param, dx, dy, phi = sample_mu_state(ptype, pp, plen, poff, perim)
        ok = True
        for j in range(n):
            r = abscissa_of_param(ptype, pp, poff, piece, param)
            out_vals[j] = obs_eval(okind, oprm, perim, r, phi)
            status, piece, param, phi, dx, dy, t = step(
                ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy
            )
            if status != OK:
                ok = False
                break
        if ok:
            return discards
        discards += 1


@njit(cache=True)
def run_covariance(ptype, pp, plen, poff, perim, wlabel,
                   fkind, fprm, gkind, gprm, nsteps, seed, lags,
                   out_sum_fg, out_sum_f, out_sum_g, out_count):
    """Accumulate sums for cov(f, g o T^lag) along one long orbit.

    out_sum_fg[i] collects f(x_t) g(x_{t+lag_i}); the ring buffer holds f
    values. Restarts from a fresh mu sample after singular events.
    """
    np.random.seed(seed)
    maxlag = 0
    for i in range(lags.shape[0]):
        if lags[i] > maxlag:
            maxlag = lags[i]
    buf = np.zeros(maxlag + 1)
    piece, param, dx, dy, phi = sample_mu_state(ptype, pp, plen, poff, perim)
    t_idx = 0  # steps since last restart
    done = 0
    while done < nsteps:
        r = abscissa_of_param(ptype, pp, poff, piece, param)
        fv = obs_eval(fkind, fprm, perim, r, phi)
        gv = obs_eval(gkind, gprm, perim, r, phi)
        buf[t_idx % (maxlag + 1)] = fv
        out_sum_f[0] += fv
        out_sum_g[0] += gv
        out_count[0] += 1
        for i in range(lags.shape[0]):
            lag = lags[i]
            if t_idx >= lag:
                out_sum_fg[i] += buf[(t_idx - lag) % (maxlag + 1)] * gv
                out_count[1 + i] += 1
        status, piece, param, phi, dx, dy, tt = step(
            ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy
        )
        done += 1
        t_idx += 1
        if status != OK:
            piece, param, dx, dy, phi = sample_mu_state(
                ptype, pp, plen, poff, perim
            )
            t_idx = 0
    return done


@njit(cache=True)
def run_excursion_capture(ptype, pp, plen, poff, perim, wlabel,
                          target_label, min_wall_hits, max_tries, seed,
                          out_side, out_s, out_phi):
    """Sample mu|M starts until an excursion into `target_label` makes at
    least `min_wall_hits` reflections on its first-hit wall; record the
    excursion collisions (wall side, wall coordinate, angle).

    Returns the number of collisions recorded (0 when none found).
    """
    np.random.seed(seed)
    cap = out_s.shape[0]
    for _ in range(max_tries):
        piece, param, dx, dy, phi = sample_m_state(
            ptype, pp, plen, poff, perim, wlabel
        )
        status, piece, param, phi, dx, dy, t = step(
            ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy
        )
        if status != OK:
            continue
        if in_cusp_nbhd(ptype, pp, wlabel, piece, param) != target_label:
            continue
        count = 0
        first_side = pp[piece, 4]
        first_hits = 1
        ok = True
        out_side[count] = pp[piece, 4]
        out_s[count] = param
        out_phi[count] = phi
        count += 1
        while True:
            status, piece, param, phi, dx, dy, t = step(
                ptype, pp, plen, poff, perim, wlabel, piece, param, dx, dy
            )
            if status != OK:
                ok = False
                break
            if in_cusp_nbhd(ptype, pp, wlabel, piece, param) != target_label:
                break
            if count >= cap:
                ok = False
                break
            out_side[count] = pp[piece, 4]
            out_s[count] = param
            out_phi[count] = phi
            if pp[piece, 4] == first_side:
                first_hits += 1
            count += 1
        if ok and first_hits >= min_wall_hits:
            return count
    return 0


@njit(cache=True)
def run_cusp_local(side0, s0, v0, c_up, c_lo, beta, s_exit, smax, max_steps,
                   out_side, out_s, out_phi):
    """Corner-series integrator in cusp-local coordinates.

    Starts on wall `side0` (+1 upper, -1 lower) at coordinate s0 with the
    outgoing direction at angle v0 to the tangent line through the vertex
    (moving inward).  Steps until the next wall hit falls beyond s_exit or
    the ray leaves the wall range.  Returns the number of recorded
    collisions; out_phi is the angle from the s-increasing wall tangent.
    """
    side = side0
    s = s0
    dx = -np.cos(v0)
    dy = -np.sin(v0) * side
    count = 0
    cap = out_s.shape[0]
    for _ in range(max_steps):
        other = -side
        c_other = c_up if other > 0 else c_lo
        c_this = c_up if side > 0 else c_lo
        x0 = s
        y0 = side * _wall_w(c_this, beta, s)
        t, s_new = ray_wall_hit_local(
            other, c_other, beta, smax, x0, y0, dx, dy, T_MIN, np.inf
        )
        if not np.isfinite(t) or s_new > s_exit or s_new < VERTEX_TOL:
            break
        zp = other * _wall_wp(c_other, beta, s_new)
        nrm = np.sqrt(1.0 + zp * zp)
        tx, ty = 1.0 / nrm, zp / nrm  # s-increasing wall tangent
        if other > 0:
            nx, ny = ty, -tx  # inward normal points into the slit
        else:
            nx, ny = -ty, tx
        dn = dx * nx + dy * ny
        dt = dx * tx + dy * ty
        if abs(dn) < GRAZE_TOL:
            break
        dx = dx - 2.0 * dn * nx
        dy = dy - 2.0 * dn * ny
        phi_loc = np.arctan2(-dn, dt)
        side = other
        s = s_new
        if count < cap:
            out_side[count] = side
            out_s[count] = s
            out_phi[count] = phi_loc
            count += 1
        else:
            break
    return count
