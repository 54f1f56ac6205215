"""Pure-Python fallback for the compiled kernels in _core.pyx.

Slow (one Python-level loop iteration per voxel step) but dependency-free.
Every arithmetic expression mirrors the compiled version so both back ends
produce bit-identical results; keep the two files in lockstep when touching
either.  The ``workers`` arguments are accepted for interface parity; the
aggregation join makes results worker-count independent, so this back end
always runs sequentially.
"""

import math

import numpy as np

_DEG_EPS_SQ = 1e-24
_T_GUARD = 1e-9

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

_INF = math.inf


class _Ray:
    __slots__ = ("idx", "idy", "idz", "sx", "sy", "sz", "i", "j", "k",
                 "ei", "ej", "ek", "end_in_grid", "t1", "ox", "oy", "oz",
                 "status")


def _clampi(v, hi):
    if v < 0:
        return 0
    if v > hi:
        return hi
    return v


def _ray_init(g, ox, oy, oz, ex, ey, ez):
    x0, y0, z0, h, nx, ny, nz = g
    r = _Ray()
    dx = ex - ox
    dy = ey - oy
    dz = ez - oz
    xmax = x0 + nx * h
    ymax = y0 + ny * h
    zmax = z0 + nz * h
    t0 = 0.0
    t1 = 1.0

    r.status = 0
    if dx * dx + dy * dy + dz * dz < _DEG_EPS_SQ:
        r.status = 2
        return r

    for o, d, lo, hi in ((ox, dx, x0, xmax), (oy, dy, y0, ymax),
                         (oz, dz, z0, zmax)):
        if d == 0.0:
            if o < lo or o >= hi:
                r.status = 1
                return r
        else:
            ta = (lo - o) / d
            tb = (hi - o) / d
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
    if t0 > t1:
        r.status = 1
        return r

    px = ox + t0 * dx
    py = oy + t0 * dy
    pz = oz + t0 * dz
    if t0 == t1:
        if not (x0 <= px < xmax and y0 <= py < ymax and z0 <= pz < zmax):
            r.status = 1
            return r

    r.i = _clampi(int(math.floor((px - x0) / h)), nx - 1)
    r.j = _clampi(int(math.floor((py - y0) / h)), ny - 1)
    r.k = _clampi(int(math.floor((pz - z0) / h)), nz - 1)

    r.end_in_grid = (x0 <= ex < xmax and y0 <= ey < ymax and z0 <= ez < zmax)
    if r.end_in_grid:
        r.ei = _clampi(int(math.floor((ex - x0) / h)), nx - 1)
        r.ej = _clampi(int(math.floor((ey - y0) / h)), ny - 1)
        r.ek = _clampi(int(math.floor((ez - z0) / h)), nz - 1)
    else:
        r.ei = r.ej = r.ek = -1

    r.sx = 1 if dx > 0 else (-1 if dx < 0 else 0)
    r.sy = 1 if dy > 0 else (-1 if dy < 0 else 0)
    r.sz = 1 if dz > 0 else (-1 if dz < 0 else 0)
    r.idx = 1.0 / dx if dx != 0.0 else 0.0
    r.idy = 1.0 / dy if dy != 0.0 else 0.0
    r.idz = 1.0 / dz if dz != 0.0 else 0.0
    r.ox = ox
    r.oy = oy
    r.oz = oz
    r.t1 = t1
    return r


def _next_axis(r, g):
    # an axis never steps beyond its endpoint index; see _core.pyx
    x0, y0, z0, h, nx, ny, nz = g
    if r.sx > 0 and not (r.end_in_grid and r.i + 1 > r.ei):
        tx = (x0 + (r.i + 1) * h - r.ox) * r.idx
    elif r.sx < 0 and not (r.end_in_grid and r.i - 1 < r.ei):
        tx = (x0 + r.i * h - r.ox) * r.idx
    else:
        tx = _INF
    if r.sy > 0 and not (r.end_in_grid and r.j + 1 > r.ej):
        ty = (y0 + (r.j + 1) * h - r.oy) * r.idy
    elif r.sy < 0 and not (r.end_in_grid and r.j - 1 < r.ej):
        ty = (y0 + r.j * h - r.oy) * r.idy
    else:
        ty = _INF
    if r.sz > 0 and not (r.end_in_grid and r.k + 1 > r.ek):
        tz = (z0 + (r.k + 1) * h - r.oz) * r.idz
    elif r.sz < 0 and not (r.end_in_grid and r.k - 1 < r.ek):
        tz = (z0 + r.k * h - r.oz) * r.idz
    else:
        tz = _INF
    if tx <= ty and tx <= tz:
        return 0, tx
    elif ty <= tz:
        return 1, ty
    else:
        return 2, tz


def _at_end(r):
    return r.end_in_grid and r.i == r.ei and r.j == r.ej and r.k == r.ek


def _step(r, axis):
    if axis == 0:
        r.i += r.sx
    elif axis == 1:
        r.j += r.sy
    else:
        r.k += r.sz


def _in_bounds(r, g):
    _, _, _, _, nx, ny, nz = g
    return 0 <= r.i < nx and 0 <= r.j < ny and 0 <= r.k < nz


def traverse(ox, oy, oz, ex, ey, ez, x0, y0, z0, h, nx, ny, nz, blocked, out):
    g = (x0, y0, z0, h, nx, ny, nz)
    ny_, nz_ = ny, nz
    has_mask = len(blocked) > 0
    ray = _ray_init(g, ox, oy, oz, ex, ey, ez)
    if ray.status != 0:
        return 0, False, False, ray.status

    cap = out.shape[0]
    reached = False
    blocked_hit = False
    out[0, 0] = ray.i
    out[0, 1] = ray.j
    out[0, 2] = ray.k
    n = 1
    if _at_end(ray):
        return n, True, False, 0
    if has_mask and blocked[(ray.i * ny_ + ray.j) * nz_ + ray.k]:
        return n, False, True, 0
    while n < cap:
        axis, t = _next_axis(ray, g)
        if t > ray.t1 + _T_GUARD:
            break
        _step(ray, axis)
        if not _in_bounds(ray, g):
            break
        out[n, 0] = ray.i
        out[n, 1] = ray.j
        out[n, 2] = ray.k
        n += 1
        if _at_end(ray):
            reached = True
            break
        if has_mask and blocked[(ray.i * ny_ + ray.j) * nz_ + ray.k]:
            blocked_hit = True
            break
    return n, reached, blocked_hit, 0


def _walk_states(ray, g, states):
    x0, y0, z0, h, nx, ny, nz = g
    cap = nx + ny + nz + 4
    if ray.end_in_grid:
        states[(ray.ei * ny + ray.ej) * nz + ray.ek] = OCCUPIED
        if _at_end(ray):
            return
    lin = (ray.i * ny + ray.j) * nz + ray.k
    if states[lin] == 0:
        states[lin] = FREE
    steps = 0
    while steps < cap:
        steps += 1
        axis, t = _next_axis(ray, g)
        if t > ray.t1 + _T_GUARD:
            return
        _step(ray, axis)
        if not _in_bounds(ray, g):
            return
        if _at_end(ray):
            return
        lin = (ray.i * ny + ray.j) * nz + ray.k
        if states[lin] == 0:
            states[lin] = FREE


def visibility(points, ox, oy, oz, x0, y0, z0, h, nx, ny, nz, workers, out):
    if workers < 1:
        raise ValueError("workers must be >= 1")
    g = (x0, y0, z0, h, nx, ny, nz)
    out[:] = 0
    pts = np.asarray(points, dtype=np.float64)
    skipped = 0
    for row in range(pts.shape[0]):
        ray = _ray_init(g, ox, oy, oz,
                        float(pts[row, 0]), float(pts[row, 1]),
                        float(pts[row, 2]))
        if ray.status == 2:
            skipped += 1
        elif ray.status == 0:
            _walk_states(ray, g, out)
    return skipped


def blocked_filter(points, ox, oy, oz, x0, y0, z0, h, nx, ny, nz,
                   blocked, keep, workers):
    if workers < 1:
        raise ValueError("workers must be >= 1")
    g = (x0, y0, z0, h, nx, ny, nz)
    pts = np.asarray(points, dtype=np.float64)
    cap = nx + ny + nz + 4
    for row in range(pts.shape[0]):
        ray = _ray_init(g, ox, oy, oz,
                        float(pts[row, 0]), float(pts[row, 1]),
                        float(pts[row, 2]))
        if ray.status != 0:
            keep[row] = 1
            continue
        hit = 0
        if not _at_end(ray):
            if blocked[(ray.i * ny + ray.j) * nz + ray.k]:
                hit = 1
            else:
                steps = 0
                while steps < cap:
                    steps += 1
                    axis, t = _next_axis(ray, g)
                    if t > ray.t1 + _T_GUARD:
                        break
                    _step(ray, axis)
                    if not _in_bounds(ray, g):
                        break
                    if _at_end(ray):
                        break
                    if blocked[(ray.i * ny + ray.j) * nz + ray.k]:
                        hit = 1
                        break
        keep[row] = 0 if hit else 1
