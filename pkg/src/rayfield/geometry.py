"""Analytic ray-surface intersection kernels.

Surfaces are planar patches (triangles and rectangles) stored with a
precomputed unit normal ``n`` and plane offset ``k``, chosen so that every
point ``p`` on the plane satisfies ``p . n + k = 0``.  A ray with origin
``o`` and unit direction ``d`` meets the plane at

    t = -(o . n + k) / (d . n)

and the hit is kept only when t lies in (0, t_max] and the hit point passes
the surface's containment test (strict barycentric positivity for
triangles, inclusive edge bounds for rectangles).

Vectors are float64 numpy arrays of shape (3,).  All functions here are
pure; they never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# |d.n| at or below this counts as parallel (no intersection reported).
EPS_PARALLEL = 1e-9
# |cos| below this clamps the per-sample thickness and flags the hit.
EPS_GRAZING = 1e-6
# Base sample thickness before the 1/cos slant correction.
DEFAULT_DELTA = 0.001


class DegenerateTriangleError(ValueError):
    """Triangle vertices are collinear (or nearly so)."""


def as_vec3(v) -> np.ndarray:
    """Coerce to a finite float64 3-vector."""
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite components")
    return a


def normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True, eq=False)
class TriangleSurface:
    """Triangle with precomputed plane data (n from the right-hand rule on
    the edges b-a, c-a; k = -(a . n))."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n: np.ndarray
    k: float
    material_id: str = "default"

    @classmethod
    def from_vertices(cls, a, b, c, material_id: str = "default") -> "TriangleSurface":
        a, b, c = as_vec3(a), as_vec3(b), as_vec3(c)
        cross = np.cross(b - a, c - a)
        area2 = np.linalg.norm(cross)
        scale = max(float(np.linalg.norm(b - a)), float(np.linalg.norm(c - a)))
        if scale == 0.0 or area2 <= 1e-12 * scale * scale:
            raise DegenerateTriangleError("triangle vertices are collinear")
        n = cross / area2
        return cls(a=a, b=b, c=c, n=n, k=-float(a @ n), material_id=material_id)

    @property
    def vertices(self) -> np.ndarray:
        return np.stack([self.a, self.b, self.c])


@dataclass(frozen=True, eq=False)
class RectSurface:
    """Rectangle spanned by two orthogonal edge vectors from a corner."""

    corner: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    n: np.ndarray
    k: float
    material_id: str = "default"

    @classmethod
    def from_corner_edges(cls, corner, edge_u, edge_v, material_id: str = "default") -> "RectSurface":
        corner, edge_u, edge_v = as_vec3(corner), as_vec3(edge_u), as_vec3(edge_v)
        lu = float(np.linalg.norm(edge_u))
        lv = float(np.linalg.norm(edge_v))
        if lu == 0.0 or lv == 0.0:
            raise ValueError("rect edge vectors must be non-zero")
        if abs(float(edge_u @ edge_v)) > 1e-9 * lu * lv:
            raise ValueError("rect edge vectors are not orthogonal")
        n = np.cross(edge_u, edge_v)
        n = n / np.linalg.norm(n)
        return cls(corner=corner, edge_u=edge_u, edge_v=edge_v, n=n,
                   k=-float(corner @ n), material_id=material_id)


@dataclass(frozen=True, eq=False)
class Ray:
    """A ray with unit direction.  view_id and pixel identify where it came
    from when the ray belongs to a rendered view."""

    origin: np.ndarray
    direction: np.ndarray
    view_id: int = 0
    pixel: tuple[int, int] = (0, 0)

    def __post_init__(self):
        object.__setattr__(self, "origin", as_vec3(self.origin))
        d = as_vec3(self.direction)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("ray direction must be unit length")
        object.__setattr__(self, "direction", d)

    @classmethod
    def towards(cls, origin, target, view_id: int = 0, pixel: tuple[int, int] = (0, 0)) -> "Ray":
        origin = as_vec3(origin)
        return cls(origin=origin, direction=normalize(as_vec3(target) - origin),
                   view_id=view_id, pixel=pixel)

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


@dataclass(frozen=True, eq=False)
class Hit:
    """One ray-surface intersection.

    ``coords`` holds (alpha, beta, gamma) for triangles or the normalized
    (u, v) pair in [0, 1] for rectangles.  ``grazing`` marks hits where the
    incidence cosine fell below EPS_GRAZING and delta_prime was clamped.
    """

    t: float
    position: np.ndarray
    coords: tuple[float, ...]
    surface_id: int
    delta_prime: float
    grazing: bool = False


def ray_plane_t(ray: Ray, n: np.ndarray, k: float, t_max: float = math.inf) -> float | None:
    """Forward distance to the plane p.n + k = 0, or None.

    Returns None for (near-)parallel rays, behind-origin hits, and hits
    beyond t_max.  Never divides by zero.
    """
    denom = float(ray.direction @ n)
    if abs(denom) <= EPS_PARALLEL:
        return None
    t = -(float(ray.origin @ n) + k) / denom
    if t <= 0.0 or t > t_max:
        return None
    return t


def barycentric(point: np.ndarray, tri: TriangleSurface) -> tuple[float, float, float]:
    """Barycentric coordinates of an in-plane point w.r.t. tri's vertices.

    Solves point = alpha*a + beta*b + gamma*c on the triangle's plane
    (so alpha + beta + gamma = 1 by construction).  The point lies inside
    the triangle exactly when all three coordinates are strictly positive.
    """
    v0 = tri.b - tri.a
    v1 = tri.c - tri.a
    v2 = as_vec3(point) - tri.a
    d00 = float(v0 @ v0)
    d01 = float(v0 @ v1)
    d11 = float(v1 @ v1)
    denom = d00 * d11 - d01 * d01
    if d00 * d11 <= 0.0 or denom <= 1e-12 * d00 * d11:
        raise DegenerateTriangleError("near-singular barycentric system")
    d20 = float(v2 @ v0)
    d21 = float(v2 @ v1)
    beta = (d11 * d20 - d01 * d21) / denom
    gamma = (d00 * d21 - d01 * d20) / denom
    return (1.0 - beta - gamma, beta, gamma)


def delta_prime(delta: float, d: np.ndarray, n: np.ndarray) -> float:
    """Slant-corrected sample thickness delta * |d||n| / (d . n).

    The value is unsigned (thickness is physically unsigned, and a signed
    value would break transmittance monotonicity).  At grazing incidence
    (|cos| < EPS_GRAZING) the result is clamped to delta / EPS_GRAZING so
    it cannot blow up.
    """
    cos = float(d @ n) / (float(np.linalg.norm(d)) * float(np.linalg.norm(n)))
    cos = abs(cos)
    if cos < EPS_GRAZING:
        return delta / EPS_GRAZING
    return delta / cos


def reflect(d: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Mirror direction d' = d - 2 (d.n)/(n.n) n.  Preserves |d|."""
    d = as_vec3(d)
    n = as_vec3(n)
    return d - 2.0 * (float(d @ n) / float(n @ n)) * n


def intersect_triangle(ray: Ray, tri: TriangleSurface, t_max: float = math.inf,
                       delta: float = DEFAULT_DELTA, surface_id: int = -1) -> Hit | None:
    """Earliest forward intersection with a triangle, or None when masked out.

    Containment is strict (alpha, beta, gamma > 0): hits exactly on an edge
    or vertex count as misses, deterministically.
    """
    t = ray_plane_t(ray, tri.n, tri.k, t_max)
    if t is None:
        return None
    p = ray.at(t)
    alpha, beta, gamma = barycentric(p, tri)
    if not (alpha > 0.0 and beta > 0.0 and gamma > 0.0):
        return None
    cos = abs(float(ray.direction @ tri.n))
    return Hit(t=t, position=p, coords=(alpha, beta, gamma), surface_id=surface_id,
               delta_prime=delta_prime(delta, ray.direction, tri.n),
               grazing=cos < EPS_GRAZING)


def intersect_rect(ray: Ray, rect: RectSurface, t_max: float = math.inf,
                   delta: float = DEFAULT_DELTA, surface_id: int = -1) -> Hit | None:
    """Earliest forward intersection with a rectangle, or None.

    Containment uses the linear bounds 0 <= (p - corner) . e_hat <= |edge|
    along both edges (inclusive).
    """
    t = ray_plane_t(ray, rect.n, rect.k, t_max)
    if t is None:
        return None
    p = ray.at(t)
    q = p - rect.corner
    lu = float(np.linalg.norm(rect.edge_u))
    lv = float(np.linalg.norm(rect.edge_v))
    u = float(q @ rect.edge_u) / lu
    v = float(q @ rect.edge_v) / lv
    if not (0.0 <= u <= lu and 0.0 <= v <= lv):
        return None
    cos = abs(float(ray.direction @ rect.n))
    return Hit(t=t, position=p, coords=(u / lu, v / lv), surface_id=surface_id,
               delta_prime=delta_prime(delta, ray.direction, rect.n),
               grazing=cos < EPS_GRAZING)


def intersect_surface(ray: Ray, surface, t_max: float = math.inf,
                      delta: float = DEFAULT_DELTA, surface_id: int = -1) -> Hit | None:
    """Dispatch on surface kind."""
    if isinstance(surface, TriangleSurface):
        return intersect_triangle(ray, surface, t_max, delta, surface_id)
    if isinstance(surface, RectSurface):
        return intersect_rect(ray, surface, t_max, delta, surface_id)
    raise TypeError(f"unsupported surface type {type(surface).__name__}")
