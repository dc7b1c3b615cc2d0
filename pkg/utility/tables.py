import os
import re

import pandas as pd


def flatten_to_row_level(records, nested_key=None):
    """
    Flattens a list of result records into one DataFrame row per record.

    Nested dicts are spread into prefixed columns (``{key}_{field}``), so a
    record such as ``{"L": 3, "mmd": {"degree": 0.1}}`` becomes the columns
    ``L`` and ``mmd_degree``. When ``nested_key`` is given only that key is
    spread and it is spread without a prefix.

    Returns:
        pd.DataFrame
    """
    flattened_rows = []

    for entry in records:
        row = {}
        for key, value in entry.items():
            if isinstance(value, dict):
                for field, inner in value.items():
                    column = field if key == nested_key else f"{key}_{field}"
                    row[column] = inner
            else:
                row[key] = value
        flattened_rows.append(row)

    return pd.DataFrame(flattened_rows)


def write_csv(df, path):
    """Write a frame without its index, creating the parent directory."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    df.to_csv(path, index=False)
    return path


def variant_slug(name: str) -> str:
    """File-safe form of a variant label, e.g. 'IoU+HED+Reg' -> 'iou_hed_reg'."""
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
