from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

Complex = tuple[float, float]


class ElementLiteral(BaseModel):
    """JSON form of a 2-box.

    ``data`` is a flat list for diagonal algebras and a nested list of rows otherwise.
    Minus-side group-model elements may instead give ``coeffs``: ``{"g": [re, im]}``.
    """

    algebra: str
    side: Literal["plus", "minus"]
    data: list[Complex] | list[list[Complex]] | None = None
    coeffs: dict[str, Complex] | None = None
    note: str | None = Field(default=None, description="free-form provenance")

    @model_validator(mode="after")
    def _one_payload(self) -> ElementLiteral:
        if (self.data is None) == (self.coeffs is None):
            raise ValueError("exactly one of 'data' or 'coeffs' is required")
        return self


class ElementBundle(BaseModel):
    model: str
    elements: dict[str, ElementLiteral]
