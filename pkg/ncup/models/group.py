from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class CayleyTableFile(BaseModel):
    order: int = Field(..., ge=1)
    table: list[list[int]]
    labels: list[str] | None = None

    @model_validator(mode="after")
    def _check_shape(self) -> CayleyTableFile:
        if len(self.table) != self.order or any(len(row) != self.order for row in self.table):
            raise ValueError(f"table must be {self.order}x{self.order}")
        if self.labels is not None and len(self.labels) != self.order:
            raise ValueError("labels must have one entry per element")
        return self


class ActionFile(BaseModel):
    """Permutation action of a group on ``points`` points, one permutation per element."""

    group: str | CayleyTableFile
    points: int = Field(..., ge=1)
    perms: list[list[int]]

    @model_validator(mode="after")
    def _check_perms(self) -> ActionFile:
        for p in self.perms:
            if sorted(p) != list(range(self.points)):
                raise ValueError(f"{p} is not a permutation of 0..{self.points - 1}")
        return self
