from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, model_validator


CopulaFamily = Literal["gaussian", "student"]


class CopulaSpec(BaseModel):
    """
    Elliptical copula family. `shape` is the Student degrees of freedom (eta > 2).
    """
    model_config = ConfigDict(frozen=True)

    family: CopulaFamily = "gaussian"
    shape: Optional[float] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "CopulaSpec":
        if self.family == "student":
            if self.shape is None or self.shape <= 2.0:
                raise ValueError("Student copula requires shape > 2.")
        elif self.shape is not None:
            raise ValueError("Gaussian copula takes no shape parameter.")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "shape": self.shape}
