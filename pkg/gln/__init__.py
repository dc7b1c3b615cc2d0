from gln.model import GlnLayerParams, GlnModel, init_model, model_dims
from gln.block import (
    BlockOutput,
    ForwardResult,
    binarize,
    forward,
    global_context,
    gln_block,
    intermediary_embedding,
    local_context,
    predict,
    predict_adjacency,
    sym_normalize,
)
from gln.checkpoint import load_checkpoint, model_from_dict, model_to_dict, save_checkpoint
