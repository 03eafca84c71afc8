# src/models/materials.py
# Permittivity models and unit scaling (all physics in scaled units)

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Reference metals (SI, 1/s)
GOLD_OMEGA_P = 1.38e16
GOLD_GAMMA = 1.075e14
SHEETMETAL_OMEGA_P = 3.0e14
SPEED_OF_LIGHT = 3.0e8

DEFAULT_EXCLUSION_RADIUS = 1e-6


class PermittivityModel(BaseModel):
    """Relative permittivity of one region as a function of the scaled wavenumber"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["vacuum", "pec", "drude_lossless", "drude_sommerfeld"]
    omega_p_hat: float | None = Field(default=None, description="Scaled plasma wavenumber (1/length)")
    gamma_hat: float = Field(default=0.0, ge=0.0, description="Scaled damping (1/length)")
    exclusion_radius: float = Field(default=DEFAULT_EXCLUSION_RADIUS, gt=0.0)

    @model_validator(mode="after")
    def _check_parameters(self):
        if self.kind in ("drude_lossless", "drude_sommerfeld"):
            if self.omega_p_hat is None or self.omega_p_hat <= 0:
                raise ValueError("omega_p_hat must be > 0 for Drude models")
        if self.kind == "drude_lossless" and self.gamma_hat != 0.0:
            raise ValueError("drude_lossless has no damping")
        return self

    # Convenience constructors
    @classmethod
    def vacuum(cls) -> "PermittivityModel":
        return cls(kind="vacuum")

    @classmethod
    def pec(cls) -> "PermittivityModel":
        return cls(kind="pec")

    @classmethod
    def drude_lossless(cls, omega_p_hat: float, **kwargs) -> "PermittivityModel":
        return cls(kind="drude_lossless", omega_p_hat=omega_p_hat, **kwargs)

    @classmethod
    def drude_sommerfeld(cls, omega_p_hat: float, gamma_hat: float, **kwargs) -> "PermittivityModel":
        return cls(kind="drude_sommerfeld", omega_p_hat=omega_p_hat, gamma_hat=gamma_hat, **kwargs)

    @property
    def is_dispersive(self) -> bool:
        return self.kind in ("drude_lossless", "drude_sommerfeld")


class Scaling(BaseModel):
    """Geometric scale factor alpha and wave speed c; omega = c * alpha * k_hat"""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=1.0, gt=0.0)
    c: float = Field(default=SPEED_OF_LIGHT, gt=0.0)
