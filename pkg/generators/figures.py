"""
Geometric-figure images as pixel graphs.

Circles, rectangles and dividing lines are drawn back to front onto a
side x side canvas (Pillow rasterises them into a region map). Every region
gets its own colour, Gaussian noise is added to the RGB features only, and
two 4-neighbour pixels are joined iff they belong to the same region. A
segment is a connected component of one region, so the ground-truth
components and the segments coincide.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np
from PIL import Image, ImageDraw

from generators.sample import GraphSample, adjacency_from_edges
from utility.errors import ConfigError


FIGURE_KINDS = ("circle", "rectangle", "line")
PALETTE_ATTEMPTS = 1000


@dataclass
class Figure:
    kind: str
    box: Tuple[int, int, int, int]
    width: int = 1


@dataclass
class FigureImageSpec:
    side: int = 20
    max_circles: int = 2
    max_rectangles: int = 2
    max_lines: int = 1
    noise_std: float = 0.02
    num_samples: int = 3000
    min_color_distance: float = 0.2

    def __post_init__(self):
        if self.side < 3:
            raise ConfigError("image side must be at least 3")
        if min(self.max_circles, self.max_rectangles, self.max_lines) < 0:
            raise ConfigError("figure counts must be nonnegative")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be nonnegative")

    @property
    def n(self) -> int:
        return self.side * self.side


def _fitting_box(rng: np.random.Generator, side: int, width: int, height: int):
    x0 = int(rng.integers(0, side - width + 1))
    y0 = int(rng.integers(0, side - height + 1))
    return (x0, y0, x0 + width - 1, y0 + height - 1)


def sample_figures(spec: FigureImageSpec, rng: np.random.Generator) -> List[Figure]:
    """Random inventory in back-to-front order; every figure fits the canvas."""
    side = spec.side
    figures = []
    for _ in range(int(rng.integers(0, spec.max_circles + 1))):
        diameter = int(rng.integers(1, side + 1))
        figures.append(Figure("circle", _fitting_box(rng, side, diameter, diameter)))
    for _ in range(int(rng.integers(0, spec.max_rectangles + 1))):
        width, height = (int(v) for v in rng.integers(1, side + 1, size=2))
        figures.append(Figure("rectangle", _fitting_box(rng, side, width, height)))
    for _ in range(int(rng.integers(0, spec.max_lines + 1))):
        orientation = int(rng.integers(3))
        if orientation == 0:
            row = int(rng.integers(1, side - 1))
            figures.append(Figure("line", (0, row, side - 1, row)))
        elif orientation == 1:
            col = int(rng.integers(1, side - 1))
            figures.append(Figure("line", (col, 0, col, side - 1)))
        else:
            y0, y1 = (int(v) for v in rng.integers(0, side, size=2))
            figures.append(Figure("line", (0, y0, side - 1, y1)))
    order = rng.permutation(len(figures))
    return [figures[i] for i in order]


def render_regions(side: int, figures: List[Figure]) -> np.ndarray:
    """side x side map: 0 for background, k for the k-th figure (later figures on top)."""
    canvas = Image.new("L", (side, side), 0)
    draw = ImageDraw.Draw(canvas)
    for index, figure in enumerate(figures, start=1):
        if figure.kind == "circle":
            draw.ellipse(figure.box, fill=index)
        elif figure.kind == "rectangle":
            draw.rectangle(figure.box, fill=index)
        elif figure.kind == "line":
            draw.line(figure.box, fill=index, width=figure.width)
        else:
            raise ConfigError(f"unknown figure kind {figure.kind!r}")
    return np.asarray(canvas, dtype=np.int64)


def region_edges(regions: np.ndarray) -> List[Tuple[int, int]]:
    """4-neighbour pixel pairs inside the same region; pixel id = row * side + col."""
    rows, cols = regions.shape
    edges = []
    for y in range(rows):
        for x in range(cols):
            here = y * cols + x
            if x + 1 < cols and regions[y, x] == regions[y, x + 1]:
                edges.append((here, here + 1))
            if y + 1 < rows and regions[y, x] == regions[y + 1, x]:
                edges.append((here, here + cols))
    return edges


def segment_map(regions: np.ndarray) -> np.ndarray:
    """Connected components of equal-region pixels, numbered by their first pixel."""
    G = nx.Graph()
    G.add_nodes_from(range(regions.size))
    G.add_edges_from(region_edges(regions))
    segments = np.zeros(regions.size, dtype=np.int64)
    for label, component in enumerate(sorted(nx.connected_components(G), key=min)):
        segments[list(component)] = label
    return segments.reshape(regions.shape)


def region_palette(count: int, rng: np.random.Generator, min_distance: float = 0.2) -> np.ndarray:
    colors = []
    for _ in range(count):
        candidate = rng.uniform(0.0, 1.0, size=3)
        for _ in range(PALETTE_ATTEMPTS):
            if all(np.linalg.norm(candidate - other) >= min_distance for other in colors):
                break
            candidate = rng.uniform(0.0, 1.0, size=3)
        colors.append(candidate)
    return np.array(colors).reshape(count, 3)


def figure_image(figures: List[Figure], spec: FigureImageSpec,
                 rng: np.random.Generator, seed: Optional[int] = None):
    """
    Render an explicit figure list.

    Returns:
        (GraphSample, segment map of shape side x side)
    """
    regions = render_regions(spec.side, figures)
    palette = region_palette(len(figures) + 1, rng, spec.min_color_distance)
    rgb = palette[regions].reshape(-1, 3)
    if spec.noise_std > 0:
        rgb = rgb + rng.normal(0.0, spec.noise_std, size=rgb.shape)
    features = np.clip(rgb, 0.0, 1.0)

    sample = GraphSample(
        features=features,
        adjacency=adjacency_from_edges(spec.n, region_edges(regions)),
        family="figures",
        variant=f"figures_{len(figures)}",
        seed=seed,
    )
    return sample, segment_map(regions)


def gen_figure_image(spec: FigureImageSpec, seed: int = 0) -> GraphSample:
    rng = np.random.default_rng(seed)
    figures = sample_figures(spec, rng)
    sample, _ = figure_image(figures, spec, rng, seed=seed)
    return sample
