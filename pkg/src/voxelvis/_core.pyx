# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled ray/voxel kernels.

Amanatides-Woo face stepping over a cubic grid, with slab clipping for
segments that start or end outside the box.  Boundary-crossing times are
recomputed from the crossing plane at every step ((bound - origin) * 1/d),
so no rounding error accumulates along a ray, and equal crossing times break
ties in fixed x, y, z order.  The pure-Python fallback (_pycore.py) mirrors
these formulas expression-for-expression; the two back ends must produce
bit-identical output.
"""

from cython.parallel cimport prange
cimport openmp
from libc.math cimport floor, INFINITY
from libc.stdlib cimport malloc, free
from libc.string cimport memset

# squared degenerate-ray threshold: |endpoint - origin| < 1e-12 m
cdef double _DEG_EPS_SQ = 1e-24
# slack on the parametric t <= 1 guard; protects against last-step rounding
cdef double _T_GUARD = 1e-9

UNKNOWN = 0
FREE = 1
OCCUPIED = 2


cdef struct Grid:
    double x0, y0, z0
    double h
    int nx, ny, nz


cdef struct Ray:
    double idx, idy, idz     # 1/d per axis, valid only where step != 0
    int sx, sy, sz           # step direction per axis
    int i, j, k              # current voxel
    int ei, ej, ek           # endpoint voxel, valid when end_in_grid
    bint end_in_grid
    double t1                # clipped segment end, parametric in [0, 1]
    double ox, oy, oz
    int status               # 0 ok, 1 no overlap with grid, 2 degenerate


cdef inline int _clampi(int v, int hi) noexcept nogil:
    if v < 0:
        return 0
    if v > hi:
        return hi
    return v


cdef inline void _ray_init(Ray* r, const Grid* g,
                           double ox, double oy, double oz,
                           double ex, double ey, double ez) noexcept nogil:
    cdef double dx = ex - ox
    cdef double dy = ey - oy
    cdef double dz = ez - oz
    cdef double xmax = g.x0 + g.nx * g.h
    cdef double ymax = g.y0 + g.ny * g.h
    cdef double zmax = g.z0 + g.nz * g.h
    cdef double t0 = 0.0
    cdef double t1 = 1.0
    cdef double ta, tb, px, py, pz

    r.status = 0
    if dx * dx + dy * dy + dz * dz < _DEG_EPS_SQ:
        r.status = 2
        return

    if dx == 0.0:
        if ox < g.x0 or ox >= xmax:
            r.status = 1
            return
    else:
        ta = (g.x0 - ox) / dx
        tb = (xmax - ox) / dx
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
    if dy == 0.0:
        if oy < g.y0 or oy >= ymax:
            r.status = 1
            return
    else:
        ta = (g.y0 - oy) / dy
        tb = (ymax - oy) / dy
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
    if dz == 0.0:
        if oz < g.z0 or oz >= zmax:
            r.status = 1
            return
    else:
        ta = (g.z0 - oz) / dz
        tb = (zmax - oz) / dz
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
    if t0 > t1:
        r.status = 1
        return

    px = ox + t0 * dx
    py = oy + t0 * dy
    pz = oz + t0 * dz
    if t0 == t1:
        # grazing touch: counts only when the touch point owns a cell under
        # the half-open rule (a touch exactly on an upper face is outside)
        if not (px >= g.x0 and px < xmax and py >= g.y0 and py < ymax
                and pz >= g.z0 and pz < zmax):
            r.status = 1
            return

    r.i = _clampi(<int>floor((px - g.x0) / g.h), g.nx - 1)
    r.j = _clampi(<int>floor((py - g.y0) / g.h), g.ny - 1)
    r.k = _clampi(<int>floor((pz - g.z0) / g.h), g.nz - 1)

    r.end_in_grid = (ex >= g.x0 and ex < xmax and ey >= g.y0 and ey < ymax
                     and ez >= g.z0 and ez < zmax)
    if r.end_in_grid:
        r.ei = _clampi(<int>floor((ex - g.x0) / g.h), g.nx - 1)
        r.ej = _clampi(<int>floor((ey - g.y0) / g.h), g.ny - 1)
        r.ek = _clampi(<int>floor((ez - g.z0) / g.h), g.nz - 1)
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


cdef inline int _next_axis(const Ray* r, const Grid* g, double* t_out) noexcept nogil:
    # fresh crossing times from the current voxel's exit planes;
    # ties resolve x before y before z via the <= comparisons.  An axis never
    # steps beyond its endpoint index: for endpoints exactly on a cell
    # boundary the final crossings land at t == 1 and only the ones that move
    # toward the endpoint's half-open cell may be taken
    cdef double tx, ty, tz
    if r.sx > 0 and not (r.end_in_grid and r.i + 1 > r.ei):
        tx = (g.x0 + (r.i + 1) * g.h - r.ox) * r.idx
    elif r.sx < 0 and not (r.end_in_grid and r.i - 1 < r.ei):
        tx = (g.x0 + r.i * g.h - r.ox) * r.idx
    else:
        tx = INFINITY
    if r.sy > 0 and not (r.end_in_grid and r.j + 1 > r.ej):
        ty = (g.y0 + (r.j + 1) * g.h - r.oy) * r.idy
    elif r.sy < 0 and not (r.end_in_grid and r.j - 1 < r.ej):
        ty = (g.y0 + r.j * g.h - r.oy) * r.idy
    else:
        ty = INFINITY
    if r.sz > 0 and not (r.end_in_grid and r.k + 1 > r.ek):
        tz = (g.z0 + (r.k + 1) * g.h - r.oz) * r.idz
    elif r.sz < 0 and not (r.end_in_grid and r.k - 1 < r.ek):
        tz = (g.z0 + r.k * g.h - r.oz) * r.idz
    else:
        tz = INFINITY
    if tx <= ty and tx <= tz:
        t_out[0] = tx
        return 0
    elif ty <= tz:
        t_out[0] = ty
        return 1
    else:
        t_out[0] = tz
        return 2


cdef inline bint _at_end(const Ray* r) noexcept nogil:
    return r.end_in_grid and r.i == r.ei and r.j == r.ej and r.k == r.ek


cdef int _walk_collect(Ray* r, const Grid* g, const unsigned char* blocked,
                       int* out, int cap,
                       bint* reached, bint* blocked_hit) noexcept nogil:
    cdef int n = 0
    cdef int axis
    cdef double t
    cdef Py_ssize_t lin

    reached[0] = 0
    blocked_hit[0] = 0
    out[0] = r.i
    out[1] = r.j
    out[2] = r.k
    n = 1
    if _at_end(r):
        reached[0] = 1
        return n
    if blocked != NULL:
        lin = (<Py_ssize_t>r.i * g.ny + r.j) * g.nz + r.k
        if blocked[lin]:
            blocked_hit[0] = 1
            return n
    while n < cap:
        axis = _next_axis(r, g, &t)
        if t > r.t1 + _T_GUARD:
            break
        if axis == 0:
            r.i += r.sx
        elif axis == 1:
            r.j += r.sy
        else:
            r.k += r.sz
        if (r.i < 0 or r.i >= g.nx or r.j < 0 or r.j >= g.ny
                or r.k < 0 or r.k >= g.nz):
            break
        out[3 * n] = r.i
        out[3 * n + 1] = r.j
        out[3 * n + 2] = r.k
        n += 1
        if _at_end(r):
            reached[0] = 1
            break
        if blocked != NULL:
            lin = (<Py_ssize_t>r.i * g.ny + r.j) * g.nz + r.k
            if blocked[lin]:
                blocked_hit[0] = 1
                break
    return n


cdef inline void _walk_states(Ray* r, const Grid* g, unsigned char* states) noexcept nogil:
    # marks traversed voxels FREE (0 -> 1 only) and the in-grid endpoint
    # voxel OCCUPIED; the endpoint is marked up front so the aggregation rule
    # "any in-grid endpoint => OCCUPIED" holds independent of the walk
    cdef int axis
    cdef int steps = 0
    cdef int cap = g.nx + g.ny + g.nz + 4
    cdef double t
    cdef Py_ssize_t lin
    if r.end_in_grid:
        lin = (<Py_ssize_t>r.ei * g.ny + r.ej) * g.nz + r.ek
        states[lin] = 2
        if _at_end(r):
            return
    lin = (<Py_ssize_t>r.i * g.ny + r.j) * g.nz + r.k
    if states[lin] == 0:
        states[lin] = 1
    while steps < cap:
        steps += 1
        axis = _next_axis(r, g, &t)
        if t > r.t1 + _T_GUARD:
            return
        if axis == 0:
            r.i += r.sx
        elif axis == 1:
            r.j += r.sy
        else:
            r.k += r.sz
        if (r.i < 0 or r.i >= g.nx or r.j < 0 or r.j >= g.ny
                or r.k < 0 or r.k >= g.nz):
            return
        if _at_end(r):
            return
        lin = (<Py_ssize_t>r.i * g.ny + r.j) * g.nz + r.k
        if states[lin] == 0:
            states[lin] = 1


cdef inline bint _walk_is_blocked(Ray* r, const Grid* g,
                                  const unsigned char* blocked) noexcept nogil:
    # 1 when the ray enters a blocked voxel strictly before its endpoint voxel
    cdef int axis
    cdef int steps = 0
    cdef int cap = g.nx + g.ny + g.nz + 4
    cdef double t
    cdef Py_ssize_t lin
    if _at_end(r):
        return 0
    lin = (<Py_ssize_t>r.i * g.ny + r.j) * g.nz + r.k
    if blocked[lin]:
        return 1
    while steps < cap:
        steps += 1
        axis = _next_axis(r, g, &t)
        if t > r.t1 + _T_GUARD:
            return 0
        if axis == 0:
            r.i += r.sx
        elif axis == 1:
            r.j += r.sy
        else:
            r.k += r.sz
        if (r.i < 0 or r.i >= g.nx or r.j < 0 or r.j >= g.ny
                or r.k < 0 or r.k >= g.nz):
            return 0
        if _at_end(r):
            return 0
        lin = (<Py_ssize_t>r.i * g.ny + r.j) * g.nz + r.k
        if blocked[lin]:
            return 1
    return 0


cdef inline int _vis_one(const double* p, double ox, double oy, double oz,
                         const Grid* g, unsigned char* states) noexcept nogil:
    # returns 1 when the point was skipped as a degenerate ray
    cdef Ray ray
    _ray_init(&ray, g, ox, oy, oz, p[0], p[1], p[2])
    if ray.status == 2:
        return 1
    if ray.status == 0:
        _walk_states(&ray, g, states)
    return 0


cdef inline unsigned char _filter_one(const double* p, double ox, double oy,
                                      double oz, const Grid* g,
                                      const unsigned char* blocked) noexcept nogil:
    cdef Ray ray
    _ray_init(&ray, g, ox, oy, oz, p[0], p[1], p[2])
    if ray.status != 0:
        # degenerate or never inside the grid: nothing can block it
        return 1
    return 0 if _walk_is_blocked(&ray, g, blocked) else 1


# ---------------------------------------------------------------------------
# Python entry points


def traverse(double ox, double oy, double oz,
             double ex, double ey, double ez,
             double x0, double y0, double z0, double h,
             int nx, int ny, int nz,
             const unsigned char[::1] blocked,
             int[:, ::1] out):
    """Single-ray traversal into a preallocated (cap, 3) int32 buffer.

    ``blocked`` of length 0 means no pre-occupied mask.  Returns
    (n_visited, reached_endpoint, blocked_hit, status).
    """
    cdef Grid g = Grid(x0, y0, z0, h, nx, ny, nz)
    cdef Ray ray
    cdef const unsigned char* bp = NULL
    cdef bint reached = 0
    cdef bint blocked_hit = 0
    cdef int n = 0
    if blocked.shape[0] > 0:
        bp = &blocked[0]
    _ray_init(&ray, &g, ox, oy, oz, ex, ey, ez)
    if ray.status == 0:
        n = _walk_collect(&ray, &g, bp, &out[0, 0], <int>out.shape[0],
                          &reached, &blocked_hit)
    return n, bool(reached), bool(blocked_hit), ray.status


def visibility(const double[:, :] points, double ox, double oy, double oz,
               double x0, double y0, double z0, double h,
               int nx, int ny, int nz,
               int workers, unsigned char[::1] out):
    """Aggregate per-ray visibility into ``out`` (flat nx*ny*nz u8).

    Each worker marks a private state buffer; buffers are joined with an
    elementwise max under UNKNOWN < FREE < OCCUPIED, so the result is
    identical for any worker count and any ray order.  Returns the count of
    degenerate rays skipped.
    """
    cdef Py_ssize_t nvox = <Py_ssize_t>nx * ny * nz
    cdef Py_ssize_t npts = points.shape[0]
    cdef Grid g = Grid(x0, y0, z0, h, nx, ny, nz)
    cdef unsigned char* buf
    cdef unsigned char m, v
    cdef Py_ssize_t r, c
    cdef int w, tid, nthreads
    cdef int skipped = 0

    if workers < 1:
        raise ValueError("workers must be >= 1")
    # the max-join makes the result partition-independent, so requesting more
    # workers than the machine can run concurrently would only multiply
    # buffer zeroing and merge traffic; cap at the OpenMP thread limit
    nthreads = workers
    if nthreads > openmp.omp_get_max_threads():
        nthreads = openmp.omp_get_max_threads()
    buf = <unsigned char*>malloc(<size_t>nthreads * <size_t>nvox)
    if buf == NULL:
        raise MemoryError("could not allocate worker state buffers")
    try:
        for w in prange(nthreads, num_threads=nthreads, nogil=True,
                        schedule="static"):
            memset(buf + <Py_ssize_t>w * nvox, 0, <size_t>nvox)
        for r in prange(npts, num_threads=nthreads, nogil=True,
                        schedule="static"):
            tid = openmp.omp_get_thread_num()
            skipped += _vis_one(&points[r, 0], ox, oy, oz, &g,
                                buf + <Py_ssize_t>tid * nvox)
        for c in prange(nvox, num_threads=nthreads, nogil=True,
                        schedule="static"):
            m = buf[c]
            for w in range(1, nthreads):
                v = buf[<Py_ssize_t>w * nvox + c]
                if v > m:
                    m = v
            out[c] = m
    finally:
        free(buf)
    return skipped


def blocked_filter(const double[:, :] points, double ox, double oy, double oz,
                   double x0, double y0, double z0, double h,
                   int nx, int ny, int nz,
                   const unsigned char[::1] blocked,
                   unsigned char[::1] keep, int workers):
    """keep[r] = 0 iff the ray to point r enters a blocked voxel before its
    endpoint voxel (the endpoint's own voxel never blocks its own ray)."""
    cdef Grid g = Grid(x0, y0, z0, h, nx, ny, nz)
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t r
    cdef int nthreads
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if npts == 0:
        return
    nthreads = workers
    if nthreads > openmp.omp_get_max_threads():
        nthreads = openmp.omp_get_max_threads()
    for r in prange(npts, num_threads=nthreads, nogil=True, schedule="static"):
        keep[r] = _filter_one(&points[r, 0], ox, oy, oz, &g, &blocked[0])
