from typing import Callable, Dict

import numpy as np

from autodiff.tape import ADValue, Tape, constant


def numeric_gradient(fn: Callable[[Dict[str, ADValue]], ADValue],
                     values: Dict[str, np.ndarray], name: str, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of ``fn`` with respect to ``values[name]``."""
    base = {key: np.array(val, dtype=np.float64) for key, val in values.items()}
    target = base[name]
    grad = np.zeros_like(target)
    for index in np.ndindex(target.shape):
        original = target[index]
        target[index] = original + h
        plus = fn({key: constant(val) for key, val in base.items()}).item()
        target[index] = original - h
        minus = fn({key: constant(val) for key, val in base.items()}).item()
        target[index] = original
        grad[index] = (plus - minus) / (2.0 * h)
    return grad


def check_gradients(fn: Callable[[Dict[str, ADValue]], ADValue],
                    values: Dict[str, np.ndarray], h: float = 1e-6) -> Dict[str, float]:
    """
    Compare tape gradients against central differences.

    Parameters:
        fn: builds a 1x1 value from a dict of named inputs
        values: the named input matrices
        h: finite-difference step

    Returns:
        Largest scale-normalized error |g - g_num| / max(1, |g|, |g_num|) per input
    """
    tape = Tape()
    leaves = {key: tape.leaf(val, name=key) for key, val in values.items()}
    grads = tape.backward(fn(leaves))

    errors = {}
    for key, leaf in leaves.items():
        analytic = grads[leaf]
        numeric = numeric_gradient(fn, values, key, h=h)
        scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
        errors[key] = float(np.max(np.abs(analytic - numeric) / scale))
    return errors
