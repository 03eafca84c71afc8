# src/models/geometry.py
# Periodic-cell geometry: slab of thickness ell, one slit per period, truncation at +-H

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SlitShape(BaseModel):
    """Slit centred in the cell, spanning the full slab thickness"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["rectangle", "trapezoid"] = "rectangle"
    top_width: float = Field(..., gt=0.0, description="Width at x2 = +ell/2")
    base_width: float = Field(..., gt=0.0, description="Width at x2 = -ell/2")

    @model_validator(mode="after")
    def _check_shape(self):
        if self.kind == "rectangle" and self.top_width != self.base_width:
            raise ValueError("rectangular slit needs equal top and base widths")
        return self

    @classmethod
    def rectangle(cls, width: float) -> "SlitShape":
        return cls(kind="rectangle", top_width=width, base_width=width)

    @classmethod
    def trapezoid(cls, top_width: float, base_width: float) -> "SlitShape":
        return cls(kind="trapezoid", top_width=top_width, base_width=base_width)

    @property
    def min_width(self) -> float:
        return min(self.top_width, self.base_width)

    @property
    def max_width(self) -> float:
        return max(self.top_width, self.base_width)


class GratingGeometry(BaseModel):
    """
    Periodic cell (0, d) x (-H, H) with the metal slab -ell/2 < x2 < ell/2
    minus the slit. ell = 0 describes an empty (all-vacuum) cell.
    """

    model_config = ConfigDict(frozen=True)

    d: float = Field(..., gt=0.0, description="Period")
    ell: float = Field(..., ge=0.0, description="Slab thickness")
    H: float = Field(..., gt=0.0, description="Truncation half-height")
    slit: SlitShape | None = None
    metal_kind: Literal["pec", "dispersive"] = "dispersive"

    @model_validator(mode="after")
    def _check_cell(self):
        if self.H <= self.ell / 2:
            raise ValueError(f"H={self.H} must exceed ell/2={self.ell / 2}")
        if self.slit is not None:
            if self.ell == 0:
                raise ValueError("a slit needs a slab (ell > 0)")
            if self.slit.max_width >= self.d:
                raise ValueError("slit must be narrower than the period")
        return self

    @staticmethod
    def default_height(d: float, ell: float) -> float:
        """Truncation height used when the run config leaves H unset"""
        return ell / 2 + d / 2

    @property
    def has_slab(self) -> bool:
        return self.ell > 0

    def slit_polygon(self) -> list[tuple[float, float]] | None:
        """Slit corners, counter-clockwise, starting bottom-left"""
        if self.slit is None:
            return None
        c = self.d / 2
        lo, hi = -self.ell / 2, self.ell / 2
        bw, tw = self.slit.base_width / 2, self.slit.top_width / 2
        return [(c - bw, lo), (c + bw, lo), (c + tw, hi), (c - tw, hi)]

    def metal_pieces(self) -> list[list[tuple[float, float]]]:
        """Metal region as a list of simple polygons (counter-clockwise)"""
        if not self.has_slab:
            return []
        lo, hi = -self.ell / 2, self.ell / 2
        slit = self.slit_polygon()
        if slit is None:
            return [[(0.0, lo), (self.d, lo), (self.d, hi), (0.0, hi)]]
        bl, br, tr, tl = slit
        left = [(0.0, lo), bl, tl, (0.0, hi)]
        right = [br, (self.d, lo), (self.d, hi), tr]
        return [left, right]

    def metal_area(self) -> float:
        if not self.has_slab:
            return 0.0
        slit_area = 0.0
        if self.slit is not None:
            slit_area = self.ell * (self.slit.top_width + self.slit.base_width) / 2
        return self.ell * self.d - slit_area
