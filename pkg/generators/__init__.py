from generators.sample import (
    GraphSample,
    adjacency_from_edges,
    check_adjacency,
    edge_list,
    make_initial_adjacency,
    split_dataset,
)
from generators.surfaces import SURFACE_KINDS, SurfaceSpec, gen_surface, surface_spec_for
from generators.community import CommunitySpec, gen_community
from generators.figures import Figure, FigureImageSpec, figure_image, gen_figure_image
from generators.io import content_hash, dataset_summary, read_dataset, write_dataset
