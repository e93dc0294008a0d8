"""Pydantic models for command reports.

A CommandReport is what every CLI command produces: the inputs it ran on,
one Verdict per checked property, and plain result lines (reducts, critical
pairs). The JSON form has stable key order and no timing unless asked for.
"""

from pydantic import BaseModel, ConfigDict, Field


class Verdict(BaseModel):
    """Outcome of one checked property."""
    model_config = ConfigDict(populate_by_name=True)

    name: str
    anchor: str = Field(..., description="The property as a formula")
    passed: bool = Field(..., alias="pass")
    witness: str | None = None
    details: dict[str, str | int | bool] = Field(default_factory=dict)
    gating: bool = True


class Timing(BaseModel):
    """Wall-clock time spent in the command handler."""
    elapsed_ms: int = Field(..., ge=0)


class CommandReport(BaseModel):
    """Everything one command reports."""
    command: str = Field(..., min_length=1)
    inputs: dict[str, str | int | float] = Field(default_factory=dict)
    verdicts: list[Verdict] = Field(default_factory=list)
    results: list[str] = Field(default_factory=list)
    timing: Timing | None = None

    @property
    def passed(self) -> bool:
        """True when every gating verdict passed."""
        return all(v.passed for v in self.verdicts if v.gating)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    def to_text(self) -> str:
        lines = [self.command]
        lines.extend(f"  {key}: {value}" for key, value in self.inputs.items())
        lines.extend(self.results)
        for verdict in self.verdicts:
            status = "pass" if verdict.passed else "FAIL"
            if not verdict.gating:
                status += " (informational)"
            lines.append(f"[{status}] {verdict.name}: {verdict.anchor}")
            if verdict.witness is not None:
                lines.append(f"    witness: {verdict.witness}")
            lines.extend(f"    {key}: {value}" for key, value in verdict.details.items())
        if self.timing is not None:
            lines.append(f"elapsed: {self.timing.elapsed_ms} ms")
        return "\n".join(lines)
