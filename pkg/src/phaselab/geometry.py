"""Elliptical (correlation-weighted) distances to unions of convex cells.

All rate exponents in this package reduce to squared Mahalanobis distances
d2_Sigma(mu, S) = inf_{x in S} (x-mu)' Sigma^{-1} (x-mu) between a bivariate
Gaussian mean mu and a rejection region S, where Sigma = [[1, rho], [rho, 1]].
Working with the unnormalized quadratic form

    d_rho^2(u, v) = (u1-v1)^2 + (u2-v2)^2 - 2*rho*(u1-v1)*(u2-v2)

is more convenient; the two are related by d2_Sigma = d_rho^2 / (1 - rho^2).

Regions are unions of convex cells, each cell an intersection of open
half-planes {a*h1 + b*h2 > c}.  The minimizer over a cell lies either at a
tangent point on one boundary line (if that point satisfies the remaining
constraints) or at a vertex of the cell, so the infimum is computed by
candidate enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

# Membership slack for half-plane tests; region constants are O(1).
MEMBER_TOL = 1e-9

# Sentinel for "infinite exponent" (empty region / unreachable set).
INF = float("inf")


def d_rho_sq(u, v, rho: float) -> float:
    """Squared elliptical distance between points u and v."""
    du = u[0] - v[0]
    dv = u[1] - v[1]
    return du * du + dv * dv - 2.0 * rho * du * dv


def min_on_line(A: float, B: float, C: float, rho: float):
    """Minimize d_rho^2(x, 0) subject to A*x1 + B*x2 + C = 0.

    Returns (x_star, value).  The closed form also covers the axis-aligned
    cases A == 0 or B == 0 (value C^2 (1-rho^2) / B^2, resp. / A^2).
    """
    denom = A * A + B * B + 2.0 * rho * A * B
    if denom <= 0.0:
        # (A,B) = (0,0) is rejected; denom > 0 otherwise since |rho| < 1.
        raise ValueError("degenerate line: (A, B) must be nonzero")
    x1 = -C * (A + rho * B) / denom
    x2 = -C * (B + rho * A) / denom
    value = C * C * (1.0 - rho * rho) / denom
    return (x1, x2), value


@dataclass(frozen=True)
class HalfPlane:
    """Open half-plane {(h1, h2): a*h1 + b*h2 > c}."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a == 0.0 and self.b == 0.0:
            raise ValueError("half-plane normal must be nonzero")


class ConvexCell:
    """Intersection of half-planes, stored as rows of (a, b, c)."""

    __slots__ = ("rows",)

    def __init__(self, halfplanes):
        if isinstance(halfplanes, np.ndarray):
            self.rows = halfplanes.reshape(-1, 3)
            return
        rows = []
        for hp in halfplanes:
            if isinstance(hp, HalfPlane):
                rows.append((hp.a, hp.b, hp.c))
            else:
                a, b, c = hp
                if a == 0.0 and b == 0.0:
                    raise ValueError("half-plane normal must be nonzero")
                rows.append((float(a), float(b), float(c)))
        self.rows = np.asarray(rows, dtype=float).reshape(-1, 3)

    def __len__(self):
        return self.rows.shape[0]

    def contains(self, point, tol: float = MEMBER_TOL) -> bool:
        A = self.rows[:, :2]
        c = self.rows[:, 2]
        return bool(np.all(A @ np.asarray(point, dtype=float) > c - tol))

    def contains_many(self, pts: np.ndarray, tol: float = MEMBER_TOL) -> np.ndarray:
        """Vectorized membership for an (n, 2) array of points."""
        A = self.rows[:, :2]
        c = self.rows[:, 2]
        return np.all(pts @ A.T > c[None, :] - tol, axis=1)

    def _boxed_vertices(self):
        box = 1e8
        A = np.vstack(
            [
                self.rows[:, :2],
                [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            ]
        )
        c = np.concatenate([self.rows[:, 2], [-box, -box, -box, -box]])
        n = A.shape[0]
        tol = 1e-7 * (1.0 + np.abs(c))
        verts = []
        for i in range(n):
            for j in range(i + 1, n):
                M = np.array([A[i], A[j]])
                det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
                if abs(det) < 1e-14 * (np.abs(M).max() ** 2 + 1.0):
                    continue
                pt = np.linalg.solve(M, np.array([c[i], c[j]]))
                if np.all(A @ pt >= c - tol):
                    verts.append(pt)
        return A, c, verts

    def is_empty(self, tol: float = MEMBER_TOL) -> bool:
        """Feasibility of the closed cell, via vertex enumeration in a big box.

        Adding a bounding box guarantees the (closed, nonempty) intersection
        has a vertex, so emptiness reduces to checking all pairwise line
        intersections.
        """
        _, _, verts = self._boxed_vertices()
        return len(verts) == 0

    def has_interior(self) -> bool:
        """True when the cell has positive area (its vertex centroid is
        strictly feasible); degenerate slivers at regime boundaries fail."""
        A, c, verts = self._boxed_vertices()
        if not verts:
            return False
        centroid = np.mean(verts, axis=0)
        margin = 1e-9 * (1.0 + np.abs(c))
        return bool(np.all(A @ centroid >= c + margin))

    def distance_sq(self, mu, rho: float) -> float:
        """inf over the cell of d_rho^2(mu, .); +inf for an empty cell."""
        mu = np.asarray(mu, dtype=float)
        if self.contains(mu):
            return 0.0
        A = self.rows[:, :2]
        c = self.rows[:, 2]
        n = len(self)
        best = INF
        scale = max(1.0, float(np.abs(mu).max()), float(np.abs(c).max()))
        tol = MEMBER_TOL * scale
        # Tangent points on each boundary line, filtered by the other rows.
        for i in range(n):
            a, b = A[i]
            C = a * mu[0] + b * mu[1] - c[i]
            (y1, y2), val = min_on_line(a, b, C, rho)
            pt = np.array([mu[0] + y1, mu[1] + y2])
            if np.all(A @ pt >= c - tol):
                if val < best:
                    best = val
        # Vertices: pairwise boundary intersections inside the cell.
        for i in range(n):
            for j in range(i + 1, n):
                M = np.array([A[i], A[j]])
                det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
                if abs(det) < 1e-13:
                    continue
                pt = np.linalg.solve(M, np.array([c[i], c[j]]))
                if np.all(A @ pt >= c - tol * max(1.0, np.abs(pt).max())):
                    val = d_rho_sq(mu, pt, rho)
                    if val < best:
                        best = val
        if best == INF:
            # No boundary candidate: fine for an empty cell or a measure-zero
            # sliver (which carries no probability, hence infinite exponent);
            # a full-dimensional cell without candidates is a region bug.
            if self.has_interior():
                raise AssertionError(
                    "nonempty cell with no distance candidates: region bug"
                )
            return INF
        return best


@dataclass
class RegionSpec:
    """Rejection region R and its complement, as unions of convex cells."""

    cells_R: list = field(default_factory=list)
    cells_Rc: list = field(default_factory=list)

    def member(self, point, tol: float = MEMBER_TOL) -> bool:
        return any(cell.contains(point, tol) for cell in self.cells_R)

    def member_many(self, pts: np.ndarray, tol: float = MEMBER_TOL) -> np.ndarray:
        out = np.zeros(pts.shape[0], dtype=bool)
        for cell in self.cells_R:
            out |= cell.contains_many(pts, tol)
        return out

    def member_many_complement(self, pts: np.ndarray, tol: float = MEMBER_TOL) -> np.ndarray:
        out = np.zeros(pts.shape[0], dtype=bool)
        for cell in self.cells_Rc:
            out |= cell.contains_many(pts, tol)
        return out


@njit(cache=True)
def _min_dist_kernel(rows, offsets, mu1, mu2, rho):
    """Minimum d_rho^2 from (mu1, mu2) to a union of packed cells.

    Same candidate enumeration as ConvexCell.distance_sq; cells without
    feasible candidates contribute +inf (empty or measure-zero slivers).
    """
    best = np.inf
    omr2 = 1.0 - rho * rho
    for ci in range(offsets.shape[0] - 1):
        s0, s1 = offsets[ci], offsets[ci + 1]
        inside = True
        scale = 1.0
        for k in range(s0, s1):
            c = rows[k, 2]
            if abs(c) > scale:
                scale = abs(c)
            if rows[k, 0] * mu1 + rows[k, 1] * mu2 <= c - 1e-9:
                inside = False
        if inside:
            return 0.0
        if abs(mu1) > scale:
            scale = abs(mu1)
        if abs(mu2) > scale:
            scale = abs(mu2)
        tol = 1e-9 * scale
        cellbest = np.inf
        for k in range(s0, s1):
            A = rows[k, 0]
            B = rows[k, 1]
            C = A * mu1 + B * mu2 - rows[k, 2]
            denom = A * A + B * B + 2.0 * rho * A * B
            if denom <= 0.0:
                continue
            x1 = mu1 - C * (A + rho * B) / denom
            x2 = mu2 - C * (B + rho * A) / denom
            feas = True
            for j in range(s0, s1):
                if rows[j, 0] * x1 + rows[j, 1] * x2 < rows[j, 2] - tol:
                    feas = False
                    break
            if feas:
                val = C * C * omr2 / denom
                if val < cellbest:
                    cellbest = val
        for k in range(s0, s1):
            for ell in range(k + 1, s1):
                a1 = rows[k, 0]
                b1 = rows[k, 1]
                c1 = rows[k, 2]
                a2 = rows[ell, 0]
                b2 = rows[ell, 1]
                c2 = rows[ell, 2]
                det = a1 * b2 - b1 * a2
                if abs(det) < 1e-13:
                    continue
                x1 = (c1 * b2 - b1 * c2) / det
                x2 = (a1 * c2 - c1 * a2) / det
                m = abs(x1)
                if abs(x2) > m:
                    m = abs(x2)
                if m < 1.0:
                    m = 1.0
                ptol = tol * m
                feas = True
                for j in range(s0, s1):
                    if rows[j, 0] * x1 + rows[j, 1] * x2 < rows[j, 2] - ptol:
                        feas = False
                        break
                if feas:
                    du = mu1 - x1
                    dv = mu2 - x2
                    val = du * du + dv * dv - 2.0 * rho * du * dv
                    if val < cellbest:
                        cellbest = val
        if cellbest < best:
            best = cellbest
    return best


def pack_cells(cells):
    """Concatenate cell rows into (rows, offsets) arrays for the kernel."""
    offsets = np.zeros(len(cells) + 1, dtype=np.int64)
    chunks = []
    for i, cell in enumerate(cells):
        chunks.append(cell.rows)
        offsets[i + 1] = offsets[i] + cell.rows.shape[0]
    if chunks:
        rows = np.ascontiguousarray(np.vstack(chunks))
    else:
        rows = np.zeros((0, 3))
    return rows, offsets


def region_distance_sq(cells, mu, rho: float, packed=None) -> float:
    """d2_Sigma(mu, union of cells) = min over cells of d_rho^2 / (1 - rho^2).

    Returns the infinite-exponent sentinel when every cell is empty or
    degenerate.  `packed` may carry a pre-packed (rows, offsets) pair.
    """
    if packed is None:
        packed = pack_cells(cells)
    rows, offsets = packed
    best = _min_dist_kernel(rows, offsets, float(mu[0]), float(mu[1]), float(rho))
    if best == INF:
        # Distinguish empty/sliver cells (legitimate +inf) from a bug.
        for cell in cells:
            cell.distance_sq(mu, rho)
        return INF
    return best / (1.0 - rho * rho)


def _grid_min(cells, mu, rho, c1, c2, hw, n):
    g = np.linspace(c1 - hw, c1 + hw, n)
    h = np.linspace(c2 - hw, c2 + hw, n)
    H1, H2 = np.meshgrid(g, h, indexing="ij")
    pts = np.column_stack([H1.ravel(), H2.ravel()])
    mask = np.zeros(pts.shape[0], dtype=bool)
    for cell in cells:
        mask |= cell.contains_many(pts, tol=0.0)
    if not mask.any():
        return None, None
    d1 = pts[mask, 0] - mu[0]
    d2 = pts[mask, 1] - mu[1]
    vals = d1 * d1 + d2 * d2 - 2.0 * rho * d1 * d2
    k = int(np.argmin(vals))
    return float(vals[k]), pts[mask][k]


def brute_force_region_distance_sq(cells, mu, rho, half_width=None, n=600):
    """Dense-grid oracle for region_distance_sq (testing only).

    Each cell is scanned separately: the elliptical objective restricted to a
    convex cell has a single basin, so a coarse pass plus two zoom passes per
    cell is reliable; the union distance is the minimum over cells.  Windows
    widen once if a cell is not seen in the initial window.
    """
    mu = np.asarray(mu, dtype=float)
    if half_width is None:
        scale = max(1.0, float(np.abs(mu).max()))
        for cell in cells:
            if len(cell):
                scale = max(scale, float(np.abs(cell.rows[:, 2]).max(initial=0.0)))
        half_width = 4.0 * scale
    best = INF
    for cell in cells:
        hw = half_width
        val, argmin = _grid_min([cell], mu, rho, mu[0], mu[1], hw, n)
        if val is None:
            hw = 8.0 * half_width
            val, argmin = _grid_min([cell], mu, rho, mu[0], mu[1], hw, n)
            if val is None:
                continue
        for _ in range(2):
            hw = 12.0 * (2.0 * hw / (n - 1))
            v2, p2 = _grid_min([cell], mu, rho, argmin[0], argmin[1], hw, n)
            if v2 is not None and v2 < val:
                val, argmin = v2, p2
        best = min(best, val)
    if best == INF:
        return INF
    return best / (1.0 - rho * rho)
