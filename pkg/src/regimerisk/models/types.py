"""
regimerisk.models.types
~~~~~~~~~~~~~~~~~~~~~~~
Annotated field types shared by the pydantic models.

Types:
    - FloatArray: numpy float array field, accepts lists, serializes to nested lists.
    - IntArray: numpy integer array field.
    - Probability: float strictly inside (0, 1).
"""
from typing import Annotated

import numpy as np
from pydantic import BeforeValidator, Field, PlainSerializer


def _as_float_array(value) -> np.ndarray:
    return np.asarray(value, dtype=float)


def _as_int_array(value) -> np.ndarray:
    return np.asarray(value, dtype=int)


FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_float_array),
    PlainSerializer(lambda array: array.tolist(), return_type=list),
]

IntArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_int_array),
    PlainSerializer(lambda array: array.tolist(), return_type=list),
]

Probability = Annotated[float, Field(gt=0.0, lt=1.0)]
