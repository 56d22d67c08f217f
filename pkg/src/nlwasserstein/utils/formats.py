"""Formats to tranform the results into another format.

Functions:
    | *numpy_array()* converts an array-like data to np.ndarray
    | *jsonable()* converts numpy values, enums and dataclasses into JSON-compatible objects.
    | *dict_to_dataframe()* returns a pandas dataframe from a list of flat dictionaries.
    | *write_json()* writes a JSON document with sorted keys and a fixed float format.
"""

from __future__ import annotations

import dataclasses
import json
import math

from enum import Enum
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np
import pandas as pd

from nlwasserstein.utils.types import Array


def numpy_array(arr: Array, dtype: Any = float) -> np.ndarray:

    if not isinstance(arr, np.ndarray):
        return np.asarray(arr, dtype=dtype)
    else:
        return arr


def jsonable(obj: Any) -> Any:

    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr
        }
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())

    return obj


def dict_to_dataframe(
    rows: Sequence[dict], col_names: Union[list[str], None] = None
) -> pd.DataFrame:

    df = pd.DataFrame([{k: jsonable(v) for k, v in row.items()} for row in rows])
    if col_names is not None:
        df = df.reindex(columns=col_names)

    return df


def write_json(obj: Any, file_path: Union[str, Path]) -> Path:

    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as fh:
        json.dump(jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")

    return file_path
