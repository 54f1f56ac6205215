"""Independent reference implementations used to freeze expected values.

The dense-sampling ray oracle enumerates visited voxels by walking the
segment at voxel_size/1000 steps and flooring every sample, then restores
exact visit order across sub-step boundary crossings from the analytic
crossing times (ties broken x, then y, then z).  It shares no code with the
traversal under test; numba only compiles the sampling loop so the 10,000
ray acceptance sweep fits its time budget.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def _sample_ray(ox, oy, oz, ex, ey, ez,
                x0, y0, z0, h, nx, ny, nz, step, out):  # pragma: no cover
    dx = ex - ox
    dy = ey - oy
    dz = ez - oz
    length = math.sqrt(dx * dx + dy * dy + dz * dz)
    xmax = x0 + nx * h
    ymax = y0 + ny * h
    zmax = z0 + nz * h
    n = int(math.ceil(length / step)) + 1
    if n < 2:
        n = 2
    dt = 1.0 / (n - 1)
    inv_x = 1.0 / dx if dx != 0.0 else 0.0
    inv_y = 1.0 / dy if dy != 0.0 else 0.0
    inv_z = 1.0 / dz if dz != 0.0 else 0.0

    cnt = 0
    pi = -2
    pj = -2
    pk = -2
    ev_t = np.empty(3, dtype=np.float64)
    ev_ax = np.empty(3, dtype=np.int64)
    for s in range(n):
        t = 1.0 if s == n - 1 else s * dt
        px = ox + t * dx
        py = oy + t * dy
        pz = oz + t * dz
        if not (x0 <= px < xmax and y0 <= py < ymax and z0 <= pz < zmax):
            continue
        i = int(math.floor((px - x0) / h))
        j = int(math.floor((py - y0) / h))
        k = int(math.floor((pz - z0) / h))
        if i > nx - 1:
            i = nx - 1
        if j > ny - 1:
            j = ny - 1
        if k > nz - 1:
            k = nz - 1
        if cnt == 0:
            out[0, 0] = i
            out[0, 1] = j
            out[0, 2] = k
            cnt = 1
        elif i != pi or j != pj or k != pk:
            di = i - pi
            dj = j - pj
            dk = k - pk
            n_changed = (di != 0) + (dj != 0) + (dk != 0)
            if n_changed == 1:
                out[cnt, 0] = i
                out[cnt, 1] = j
                out[cnt, 2] = k
                cnt += 1
            else:
                # sub-step multi-axis jump: order the crossings by exact
                # time, x before y before z on ties
                m = 0
                if di != 0:
                    bound = x0 + (i if di > 0 else pi) * h
                    ev_t[m] = (bound - ox) * inv_x
                    ev_ax[m] = 0
                    m += 1
                if dj != 0:
                    bound = y0 + (j if dj > 0 else pj) * h
                    ev_t[m] = (bound - oy) * inv_y
                    ev_ax[m] = 1
                    m += 1
                if dk != 0:
                    bound = z0 + (k if dk > 0 else pk) * h
                    ev_t[m] = (bound - oz) * inv_z
                    ev_ax[m] = 2
                    m += 1
                for a in range(1, m):
                    b = a
                    while b > 0 and (ev_t[b] < ev_t[b - 1]
                                     or (ev_t[b] == ev_t[b - 1]
                                         and ev_ax[b] < ev_ax[b - 1])):
                        ev_t[b], ev_t[b - 1] = ev_t[b - 1], ev_t[b]
                        ev_ax[b], ev_ax[b - 1] = ev_ax[b - 1], ev_ax[b]
                        b -= 1
                ci = pi
                cj = pj
                ck = pk
                for a in range(m):
                    ax = ev_ax[a]
                    if ax == 0:
                        ci += 1 if di > 0 else -1
                    elif ax == 1:
                        cj += 1 if dj > 0 else -1
                    else:
                        ck += 1 if dk > 0 else -1
                    out[cnt, 0] = ci
                    out[cnt, 1] = cj
                    out[cnt, 2] = ck
                    cnt += 1
        pi = i
        pj = j
        pk = k
    return cnt


def dense_ray_oracle(origin, endpoint, config, step_divisor: int = 1000) -> np.ndarray:
    """Ordered (n, 3) voxel indices crossed by origin->endpoint.

    Exact for rays whose origin lies inside the grid box (the acceptance
    setting); the clipped tail of an exiting ray is enumerated too.
    """
    o = np.asarray(origin, dtype=np.float64)
    e = np.asarray(endpoint, dtype=np.float64)
    if float(np.linalg.norm(e - o)) < 1e-12:
        raise ValueError("degenerate ray")
    nx, ny, nz = config.dims
    out = np.empty((nx + ny + nz + 3, 3), dtype=np.int32)
    cnt = _sample_ray(o[0], o[1], o[2], e[0], e[1], e[2],
                      config.x_min, config.y_min, config.z_min,
                      config.voxel_size, nx, ny, nz,
                      config.voxel_size / step_divisor, out)
    return out[:cnt].copy()


def brute_force_visibility(sweep, config) -> np.ndarray:
    """Reference per-sweep aggregation built on the dense oracle.

    Marks every oracle-visited voxel free, then overwrites voxels that
    contain an in-grid point as occupied.  Meant for tiny fixtures only.
    """
    states = np.zeros(config.dims, dtype=np.uint8)
    o = np.asarray(sweep.sensor_origin, dtype=np.float64)
    pts = np.asarray(sweep.points, dtype=np.float64)[:, :3]
    for p in pts:
        if float(np.linalg.norm(p - o)) < 1e-12:
            continue
        for i, j, k in dense_ray_oracle(o, p, config):
            if states[i, j, k] == 0:
                states[i, j, k] = 1
    mins, maxs = config.mins, config.maxs
    for p in pts:
        if ((p >= mins) & (p < maxs)).all():
            i, j, k = np.minimum(
                np.floor((p - mins) / config.voxel_size).astype(np.int64),
                np.asarray(config.dims) - 1,
            )
            states[i, j, k] = 2
    return states
