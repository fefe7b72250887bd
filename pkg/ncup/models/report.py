from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, computed_field

from .element import Complex, ElementLiteral

CheckKind = Literal["inequality", "equality"]

# Fixed margin bin edges; bins are open at both ends.
MARGIN_EDGES: list[float] = [-1e-6, -1e-9, -1e-12, 0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1e-1, 1.0, 10.0]

HEADER_NOTES: list[str] = [
    "entropy bound: the unnormalized form is scaled by |x|_2^2; checks use the normalized clause "
    "H(|y|^2) + H(|F(y)|^2) >= 2 log delta0 with y = x/|x|_2",
    "spin Young constant: with matrix-trace norms the identity substitution contradicts 1/n0^2; "
    "the probe reports margins against both 1/n0^2 and 1/n0",
    "group subset corollary: for x = sum_{g in S} lambda(g), extremality is equivalent to "
    "|x|_1 = |G| (matrix trace), not |x|_1 = |S|",
]


class Histogram(BaseModel):
    edges: list[float] = Field(default_factory=lambda: list(MARGIN_EDGES))
    counts: list[int]


class Counterexample(BaseModel):
    index: int
    seed: int
    margin: float
    elements: dict[str, ElementLiteral] = Field(default_factory=dict)


class CheckReport(BaseModel):
    name: str
    model: str
    suite: str
    kind: CheckKind
    tolerance: float
    samples: int
    min_margin: float | None
    max_violation: float
    histogram: Histogram
    counterexamples: list[Counterexample] = Field(default_factory=list)
    wall_time_s: float | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


class ProbeReport(BaseModel):
    """Findings that are reported but never fail a run."""

    name: str
    model: str
    findings: dict[str, float | int | bool | str]
    notes: list[str] = Field(default_factory=list)


class SuiteReport(BaseModel):
    seed: int
    samples: int
    models: list[str]
    notes: list[str] = Field(default_factory=lambda: list(HEADER_NOTES))
    checks: list[CheckReport] = Field(default_factory=list)
    probes: list[ProbeReport] = Field(default_factory=list)
    wall_time_s: float | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class BishiftCertificate(BaseModel):
    kind: Literal["bishift"] = "bishift"
    group: str
    subgroup: list[int]
    character: dict[str, Complex]
    coset_rep: int
    constant: Complex
    checks: dict[str, float]
    verdicts: dict[str, bool | None]
    consistent: bool


class UniquenessRow(BaseModel):
    group: str
    subgroup: list[int]
    coset_rep: int
    character: dict[str, Complex]
    conjugator: int
    dimension: int
    collinearity: float | None = None
    basis: ElementLiteral | None = None
