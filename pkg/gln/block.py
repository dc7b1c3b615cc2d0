"""
The recurrent graph learning block and its L-step chain.

One step consumes (H, A) and produces:
    H_int    = sum_i act(tau(A) H W_i)             intermediary embedding
    H_local  = act(tau(A) H_int U)                 local context
    H_global = tanh(H_local Z)                     global context
    alpha    = H_local Q H_global^T                local/global merge
    A_next   = act((M alpha M^T + (M alpha M^T)^T) / 2)

Both tau applications of a step use the incoming A. The chain feeds the
soft A_next forward; binarization only happens at readout.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from autodiff.tape import ADValue, Tape, as_ad, as_matrix, constant, elementwise, emit
from gln.model import DEFAULT_ACTIVATIONS, GlnLayerParams, GlnModel
from utility.errors import DimensionError, InvalidAdjacencyError


SYMMETRY_TOLERANCE = 1e-9


@dataclass
class BlockOutput:
    H_int: ADValue
    H_local: ADValue
    H_global: ADValue
    A_next: ADValue


@dataclass
class ForwardResult:
    blocks: List[BlockOutput]
    adjacency: ADValue
    embedding: ADValue
    leaves: Dict[str, ADValue] = field(default_factory=dict)


def sym_normalize(A) -> ADValue:
    """
    D^(-1/2) (A + I) D^(-1/2) with D = diag(row sums of A) + I.

    Raises InvalidAdjacencyError for negative entries or asymmetry above
    1e-9; smaller asymmetry is averaged away before normalizing.
    """
    A = as_ad(A)
    value = A.value
    if value.shape[0] != value.shape[1]:
        raise DimensionError(f"adjacency must be square, got {value.shape}")
    if np.any(value < 0):
        raise InvalidAdjacencyError("adjacency has negative entries")
    asymmetry = float(np.max(np.abs(value - value.T))) if value.size else 0.0
    if asymmetry > SYMMETRY_TOLERANCE:
        raise InvalidAdjacencyError(f"adjacency is not symmetric (max |A - A^T| = {asymmetry:.3e})")
    if asymmetry > 0.0:
        A = elementwise(A + A.T, "scale", factor=0.5)
        value = A.value

    B = value + np.eye(value.shape[0])
    s = 1.0 / np.sqrt(B.sum(axis=1))
    out = s[:, None] * B * s[None, :]

    def rule(grad):
        weighted = grad * B
        grad_s = (weighted * s[None, :]).sum(axis=1) + (weighted * s[:, None]).sum(axis=0)
        grad_d = -0.5 * s ** 3 * grad_s
        return (grad * np.outer(s, s) + grad_d[:, None],)

    return emit("sym_normalize", (A,), out, rule)


def intermediary_embedding(H, A, params: GlnLayerParams, activation: str = "sigmoid",
                           tau: Optional[ADValue] = None) -> ADValue:
    """Sum of k independently activated graph convolutions."""
    tau = sym_normalize(A) if tau is None else tau
    propagated = tau @ as_ad(H)
    total = None
    for W in params.W:
        term = elementwise(propagated @ as_ad(W), activation)
        total = term if total is None else total + term
    return total


def local_context(H_int, A, params: GlnLayerParams, activation: str = "sigmoid",
                  tau: Optional[ADValue] = None) -> ADValue:
    tau = sym_normalize(A) if tau is None else tau
    return elementwise(tau @ as_ad(H_int) @ as_ad(params.U), activation)


def global_context(H_local, params: GlnLayerParams, activation: str = "tanh") -> ADValue:
    return elementwise(as_ad(H_local) @ as_ad(params.Z), activation)


def predict_adjacency(H_local, params: GlnLayerParams, activation: str = "sigmoid",
                      global_activation: str = "tanh", H_global=None) -> ADValue:
    H_local = as_ad(H_local)
    if H_global is None:
        H_global = global_context(H_local, params, global_activation)
    alpha = H_local @ as_ad(params.Q) @ as_ad(H_global).T
    M = as_ad(params.M)
    S = M @ alpha @ M.T
    return elementwise(elementwise(S + S.T, "scale", factor=0.5), activation)


def gln_block(H, A, params: GlnLayerParams, activations: Optional[Dict[str, str]] = None) -> BlockOutput:
    acts = activations or DEFAULT_ACTIVATIONS
    tau = sym_normalize(A)
    H_int = intermediary_embedding(H, A, params, acts["conv"], tau=tau)
    H_local = local_context(H_int, A, params, acts["local"], tau=tau)
    H_global = global_context(H_local, params, acts["global"])
    A_next = predict_adjacency(H_local, params, acts["adjacency"], H_global=H_global)
    return BlockOutput(H_int=H_int, H_local=H_local, H_global=H_global, A_next=A_next)


def forward(model: GlnModel, H0, A0=None, tape: Optional[Tape] = None) -> ForwardResult:
    """
    Run the block L times from (H0, A0).

    Parameters:
        model: parameters and structure
        H0: n x d_0 node features
        A0: initial adjacency (identity when omitted)
        tape: when given, every parameter becomes a named leaf on it

    Returns:
        ForwardResult with per-step outputs, final adjacency and embedding,
        and the parameter leaves keyed by parameter name
    """
    H = as_ad(H0)
    A = constant(np.eye(model.n)) if A0 is None else as_ad(A0)
    if H.shape != (model.n, model.dims[0]):
        raise DimensionError(f"features have shape {H.shape}, model expects {(model.n, model.dims[0])}")
    if A.shape != (model.n, model.n):
        raise DimensionError(f"initial adjacency has shape {A.shape}, model expects {(model.n, model.n)}")

    leaves = {}
    if tape is not None:
        leaves = {name: tape.leaf(value, name=name) for name, value in model.parameters().items()}

    blocks = []
    for l, layer in enumerate(model.layers):
        if leaves:
            prefix = f"layers.{l}."
            entries = {name[len(prefix):]: leaf for name, leaf in leaves.items() if name.startswith(prefix)}
            layer = GlnLayerParams.from_named(entries, model.k)
        out = gln_block(H, A, layer, model.activations)
        blocks.append(out)
        H, A = out.H_local, out.A_next

    return ForwardResult(blocks=blocks, adjacency=A, embedding=H, leaves=leaves)


def binarize(A, epsilon: float = 0.5) -> np.ndarray:
    """Edge iff probability > epsilon; the diagonal is never an edge."""
    value = A.value if isinstance(A, ADValue) else as_matrix(A)
    edges = (value > epsilon).astype(np.int8)
    np.fill_diagonal(edges, 0)
    return edges


def predict(model: GlnModel, features, A0=None) -> np.ndarray:
    """Soft final adjacency for one sample, no tape."""
    return forward(model, features, A0).adjacency.value
