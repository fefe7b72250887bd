from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import settings

ElementClass = Literal[
    "generic",
    "positive",
    "self_adjoint",
    "projection",
    "partial_isometry",
    "unitary",
    "sparse",
    "biunitary_candidate",
]
SideChoice = Literal["plus", "minus", "both"]
SuiteName = Literal[
    "plancherel",
    "hausdorff_young",
    "young",
    "donoho_stark",
    "hirschman_beckner",
    "structure",
    "minimizers",
    "entropy_max",
]
ProbeName = Literal["tao", "spin_young"]
ReportFormat = Literal["json", "csv", "xlsx"]

ALL_SUITES: tuple[SuiteName, ...] = (
    "plancherel",
    "hausdorff_young",
    "young",
    "donoho_stark",
    "hirschman_beckner",
    "structure",
    "minimizers",
    "entropy_max",
)
ALL_PROBES: tuple[ProbeName, ...] = ("tao", "spin_young")

DEFAULT_P_GRID = [2.0, 2.5, 3.0, 4.0, 8.0, math.inf]
DEFAULT_YOUNG_TRIPLES = [
    (1.0, 1.0, 1.0),
    (1.0, 2.0, 2.0),
    (2.0, 1.0, 2.0),
    (2.0, 2.0, math.inf),
    (1.0, math.inf, math.inf),
    (math.inf, 1.0, math.inf),
    (1.5, 1.5, 3.0),
    (1.5, 3.0, math.inf),
    (4.0 / 3.0, 4.0 / 3.0, 2.0),
]


class SampleSpec(BaseModel):
    """Where and how to draw one stream of random elements."""

    model_config = ConfigDict(frozen=True)

    model: str
    count: int = Field(..., ge=1)
    master_seed: int = Field(..., ge=0, lt=2**64)
    element_class: ElementClass = "generic"
    sparse_k: int | None = Field(default=None, ge=1)
    side: SideChoice = "plus"

    @model_validator(mode="after")
    def _sparse_needs_k(self) -> SampleSpec:
        if self.element_class == "sparse" and self.sparse_k is None:
            raise ValueError("sparse samples need sparse_k")
        return self


def parse_element_class(token: str) -> tuple[ElementClass, int | None]:
    """``"sparse:3"`` → ``("sparse", 3)``; other names map to themselves."""
    name, _, arg = token.strip().partition(":")
    allowed: tuple[str, ...] = ElementClass.__args__  # type: ignore[attr-defined]
    if name not in allowed:
        raise ValueError(f"unknown element class {token!r}")
    if name == "sparse":
        if not arg.isdigit() or int(arg) < 1:
            raise ValueError(f"sparse class needs a positive size, e.g. sparse:2, got {token!r}")
        return "sparse", int(arg)
    if arg:
        raise ValueError(f"element class {name!r} takes no parameter")
    return name, None  # type: ignore[return-value]


class SuiteConfig(BaseModel):
    """Contents of a suite configuration file; CLI flags override individual fields."""

    models: list[str] = Field(default_factory=lambda: ["group:cyclic:6"], min_length=1)
    samples: int = Field(default_factory=lambda: settings.DEFAULT_SAMPLES, ge=1)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0, lt=2**64)
    element_classes: list[str] = Field(
        default_factory=lambda: [
            "generic",
            "positive",
            "self_adjoint",
            "projection",
            "partial_isometry",
            "unitary",
            "sparse:2",
        ],
        min_length=1,
    )
    side: SideChoice = "both"
    p_grid: list[float] = Field(default_factory=lambda: list(DEFAULT_P_GRID), min_length=1)
    young_triples: list[tuple[float, float, float]] = Field(
        default_factory=lambda: list(DEFAULT_YOUNG_TRIPLES), min_length=1
    )
    suites: list[SuiteName] = Field(default_factory=lambda: list(ALL_SUITES))
    probes: list[ProbeName] = Field(default_factory=lambda: list(ALL_PROBES))
    tol_equality: float | None = Field(default=None, ge=0.0)
    tol_inequality: float | None = Field(default=None, ge=0.0)
    tol_rank: float | None = Field(default=None, ge=0.0)
    parallel: int = Field(default_factory=lambda: settings.PARALLEL, ge=1, le=64)
    tao_budget: int | None = Field(default=None, ge=1)
    spin_probe_samples: int = Field(default=200, ge=0)
    corollary_max_order: int = Field(default=8, ge=1, le=12)
    out: str | None = None
    format: ReportFormat = "json"

    @field_validator("element_classes")
    @classmethod
    def _known_classes(cls, v: list[str]) -> list[str]:
        for token in v:
            parse_element_class(token)
        return v

    @field_validator("p_grid")
    @classmethod
    def _valid_p(cls, v: list[float]) -> list[float]:
        for p in v:
            if not (p >= 1 or math.isinf(p)) or math.isnan(p):
                raise ValueError(f"exponent must be >= 1 or inf, got {p}")
        return v

    @field_validator("young_triples")
    @classmethod
    def _valid_triples(
        cls, v: list[tuple[float, float, float]]
    ) -> list[tuple[float, float, float]]:
        for p, q, r in v:
            if not all(e >= 1 for e in (p, q, r)):
                raise ValueError(f"exponents must be >= 1 or inf, got {(p, q, r)}")
            if abs(1 / p + 1 / q - 1 / r - 1) > 1e-12:
                raise ValueError(f"(p, q, r) = {(p, q, r)} violates 1/p + 1/q = 1/r + 1")
        return v
