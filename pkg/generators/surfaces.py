"""
3-D surface meshes.

A regular u x v parameter grid is pushed through one of six parametric
surfaces, then through a random affine transform. Nodes carry their 3-D
position; edges are the 4-neighbourhood of the parameter grid, wrapping
around only along periodic (angular) coordinates.

    ellipsoid             x^2/a^2 + y^2/b^2 + z^2/c^2 = 1     u periodic
    elliptic_hyperboloid  x^2/a^2 + y^2/b^2 - z^2/c^2 = 1     u periodic
    elliptic_paraboloid   x^2/a^2 + y^2/b^2 = z
    saddle                x^2/a^2 - y^2/b^2 = z
    torus                 (sqrt(x^2 + y^2) - R)^2 + z^2 = r^2  u, v periodic
    sine_radial           h sin(sqrt(x^2 + y^2)) = z
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from generators.sample import GraphSample, adjacency_from_edges
from utility.errors import ConfigError


SURFACE_KINDS = (
    "ellipsoid",
    "elliptic_hyperboloid",
    "elliptic_paraboloid",
    "saddle",
    "torus",
    "sine_radial",
)
PERIODIC_AXES = {
    "ellipsoid": (True, False),
    "elliptic_hyperboloid": (True, False),
    "elliptic_paraboloid": (False, False),
    "saddle": (False, False),
    "torus": (True, True),
    "sine_radial": (False, False),
}
DEFAULT_EXTENT = {
    "elliptic_hyperboloid": 1.0,
    "elliptic_paraboloid": 1.0,
    "saddle": 1.0,
    "sine_radial": 2.0 * np.pi,
}
GRID_FOR_NODES = {100: (10, 10), 400: (20, 20)}

TRANSFORM_PROBABILITY = 0.5
SCALE_RANGE = (0.5, 2.0)
TRANSLATION_RANGE = (-1.0, 1.0)
SHEAR_RANGE = (-0.3, 0.3)
MIN_DETERMINANT = 1e-9


@dataclass
class SurfaceSpec:
    kind: str
    u_steps: int = 10
    v_steps: int = 10
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    R: float = 2.0
    r: float = 1.0
    h: float = 1.0
    extent: Optional[float] = None
    transform: bool = True

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ConfigError(f"unknown surface kind {self.kind!r}; choose from {SURFACE_KINDS}")
        if self.u_steps < 1 or self.v_steps < 1:
            raise ConfigError("grid resolution must be positive")
        for name in ("a", "b", "c", "R", "r", "h"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"surface parameter {name} must be positive")
        if self.extent is not None and self.extent <= 0:
            raise ConfigError("surface extent must be positive")

    @property
    def n(self) -> int:
        return self.u_steps * self.v_steps


def surface_spec_for(kind: str, nodes: int) -> SurfaceSpec:
    """Spec for the 100- and 400-node surface datasets."""
    if nodes not in GRID_FOR_NODES:
        raise ConfigError(f"surface datasets use 100 or 400 nodes, got {nodes}")
    u_steps, v_steps = GRID_FOR_NODES[nodes]
    return SurfaceSpec(kind=kind, u_steps=u_steps, v_steps=v_steps)


def _axis(steps: int, periodic: bool, low: float, high: float) -> np.ndarray:
    if periodic:
        return np.arange(steps) * (2.0 * np.pi / steps)
    if steps == 1:
        return np.array([(low + high) / 2.0])
    return np.linspace(low, high, steps)


def surface_points(spec: SurfaceSpec) -> np.ndarray:
    """Untransformed grid points, row i * v_steps + j for parameter (u_i, v_j)."""
    kind = spec.kind
    extent = spec.extent if spec.extent is not None else DEFAULT_EXTENT.get(kind, 1.0)

    if kind == "ellipsoid":
        u = _axis(spec.u_steps, True, 0.0, 0.0)
        v = np.pi * (np.arange(spec.v_steps) + 0.5) / spec.v_steps
        U, V = np.meshgrid(u, v, indexing="ij")
        x = spec.a * np.sin(V) * np.cos(U)
        y = spec.b * np.sin(V) * np.sin(U)
        z = spec.c * np.cos(V)
    elif kind == "elliptic_hyperboloid":
        u = _axis(spec.u_steps, True, 0.0, 0.0)
        t = _axis(spec.v_steps, False, -extent, extent)
        U, T = np.meshgrid(u, t, indexing="ij")
        x = spec.a * np.cosh(T) * np.cos(U)
        y = spec.b * np.cosh(T) * np.sin(U)
        z = spec.c * np.sinh(T)
    elif kind == "torus":
        u = _axis(spec.u_steps, True, 0.0, 0.0)
        v = _axis(spec.v_steps, True, 0.0, 0.0)
        U, V = np.meshgrid(u, v, indexing="ij")
        x = (spec.R + spec.r * np.cos(V)) * np.cos(U)
        y = (spec.R + spec.r * np.cos(V)) * np.sin(U)
        z = spec.r * np.sin(V)
    else:
        xs = _axis(spec.u_steps, False, -extent, extent)
        ys = _axis(spec.v_steps, False, -extent, extent)
        x, y = np.meshgrid(xs, ys, indexing="ij")
        if kind == "elliptic_paraboloid":
            z = x ** 2 / spec.a ** 2 + y ** 2 / spec.b ** 2
        elif kind == "saddle":
            z = x ** 2 / spec.a ** 2 - y ** 2 / spec.b ** 2
        else:
            z = spec.h * np.sin(np.sqrt(x ** 2 + y ** 2))

    return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)


def grid_edges(u_steps: int, v_steps: int, wrap_u: bool = False,
               wrap_v: bool = False) -> List[Tuple[int, int]]:
    """4-neighbourhood of a u x v grid; wrap edges only when the axis has 3+ steps."""
    edges = set()

    def index(i, j):
        return i * v_steps + j

    for i in range(u_steps):
        for j in range(v_steps):
            if i + 1 < u_steps:
                edges.add((index(i, j), index(i + 1, j)))
            elif wrap_u and u_steps >= 3:
                edges.add(tuple(sorted((index(i, j), index(0, j)))))
            if j + 1 < v_steps:
                edges.add((index(i, j), index(i, j + 1)))
            elif wrap_v and v_steps >= 3:
                edges.add(tuple(sorted((index(i, j), index(i, 0)))))
    return sorted(edges)


def random_affine(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composition of scaling, rotation, reflection and shearing, plus a
    translation; each part is included with probability 0.5. Draws again
    while the linear part is (near) singular.
    """
    while True:
        linear = np.eye(3)
        if rng.random() < TRANSFORM_PROBABILITY:
            linear = np.diag(rng.uniform(*SCALE_RANGE, size=3)) @ linear
        if rng.random() < TRANSFORM_PROBABILITY:
            linear = Rotation.random(random_state=rng).as_matrix() @ linear
        if rng.random() < TRANSFORM_PROBABILITY:
            linear = np.diag(rng.choice([-1.0, 1.0], size=3)) @ linear
        if rng.random() < TRANSFORM_PROBABILITY:
            shear = np.eye(3)
            off_diagonal = ~np.eye(3, dtype=bool)
            shear[off_diagonal] = rng.uniform(*SHEAR_RANGE, size=6)
            linear = shear @ linear
        translation = np.zeros(3)
        if rng.random() < TRANSFORM_PROBABILITY:
            translation = rng.uniform(*TRANSLATION_RANGE, size=3)
        if abs(np.linalg.det(linear)) > MIN_DETERMINANT:
            return linear, translation


def gen_surface(spec: SurfaceSpec, seed: int = 0) -> GraphSample:
    points = surface_points(spec)
    if spec.transform:
        linear, translation = random_affine(np.random.default_rng(seed))
        points = points @ linear.T + translation

    wrap_u, wrap_v = PERIODIC_AXES[spec.kind]
    edges = grid_edges(spec.u_steps, spec.v_steps, wrap_u, wrap_v)
    return GraphSample(
        features=points,
        adjacency=adjacency_from_edges(spec.n, edges),
        family="surface",
        variant=spec.kind,
        seed=seed,
    )
