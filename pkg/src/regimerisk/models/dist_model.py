from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


DistFamily = Literal["normal", "skew_normal", "student_t", "skew_student_t", "ged"]

SKEWED_FAMILIES = ("skew_normal", "skew_student_t")
T_FAMILIES = ("student_t", "skew_student_t")
SHAPED_FAMILIES = ("student_t", "skew_student_t", "ged")


class DistSpec(BaseModel):
    """
    Standardized innovation law: zero mean, unit variance for every admissible (skew, shape).

    `skew` is the Fernandez-Steel xi (1 is symmetric) and is only meaningful for the skewed
    families. `shape` is the degrees of freedom for the t families (> 2) and the GED
    exponent (> 0).
    """
    model_config = ConfigDict(frozen=True)

    family: DistFamily = "normal"
    skew: float = Field(1.0, gt=0.0)
    shape: Optional[float] = None

    @model_validator(mode="after")
    def _check_parameters(self) -> "DistSpec":
        if self.family not in SKEWED_FAMILIES and self.skew != 1.0:
            raise ValueError(f"Family '{self.family}' takes no skew parameter.")
        if self.family in SHAPED_FAMILIES:
            if self.shape is None:
                raise ValueError(f"Family '{self.family}' requires a shape parameter.")
            if self.family in T_FAMILIES and self.shape <= 2.0:
                raise ValueError("Shape must exceed 2 for the t families.")
            if self.family == "ged" and self.shape <= 0.0:
                raise ValueError("Shape must be positive for the GED.")
        elif self.shape is not None:
            raise ValueError(f"Family '{self.family}' takes no shape parameter.")
        return self

    @classmethod
    def default_for(cls, family: str) -> "DistSpec":
        """
        Starting specification for a family: symmetric, moderate tails.

        Args:
            family (str): The family name.

        Returns:
            DistSpec: The default specification.
        """
        shape = {"student_t": 8.0, "skew_student_t": 8.0, "ged": 1.5}.get(family)
        return cls(family=family, shape=shape)

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "skew": self.skew, "shape": self.shape}
