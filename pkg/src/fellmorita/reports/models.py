from __future__ import annotations

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field

Status = Literal["pass", "fail", "skip"]


def _clip(v: str, n: int = 160) -> str:
    return v if len(v) <= n else v[: n - 1] + "…"


class CheckRecord(BaseModel):
    """One verified predicate: a stable id, the concept it exercises, and its outcome."""

    model_config = ConfigDict(extra="ignore")

    id: str
    anchor: str
    status: Status
    residual: Optional[float] = None
    message: str = ""


class Report(BaseModel):
    """
    Ordered collection of check records.

    Verification operations append records instead of raising, so a single
    run shows every failing (condition, t, s) triple at once.
    """

    model_config = ConfigDict(extra="ignore")

    records: List[CheckRecord] = Field(default_factory=list)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def overall(self) -> Status:
        return "fail" if any(r.status == "fail" for r in self.records) else "pass"

    @property
    def passed(self) -> bool:
        return self.overall == "pass"

    # ---------------------------------------------------------------------
    # building
    # ---------------------------------------------------------------------
    def add(
        self,
        id: str,
        anchor: str,
        ok: bool,
        *,
        residual: Optional[float] = None,
        message: str = "",
    ) -> CheckRecord:
        rec = CheckRecord(
            id=id,
            anchor=anchor,
            status="pass" if ok else "fail",
            residual=None if residual is None else float(residual),
            message=message,
        )
        self.records.append(rec)
        return rec

    def check(
        self,
        id: str,
        anchor: str,
        residual: float,
        tol: float,
        *,
        message: str = "",
    ) -> bool:
        """Record a residual-based check; passes iff residual <= tol."""
        ok = bool(residual <= tol)
        self.add(id, anchor, ok, residual=residual, message=message)
        return ok

    def skip(self, id: str, anchor: str, message: str, *, residual: Optional[float] = None) -> CheckRecord:
        rec = CheckRecord(id=id, anchor=anchor, status="skip", residual=residual, message=message)
        self.records.append(rec)
        return rec

    def extend(self, other: "Report", prefix: str = "") -> "Report":
        for rec in other.records:
            rid = f"{prefix}.{rec.id}" if prefix else rec.id
            self.records.append(rec.model_copy(update={"id": rid}))
        return self

    # ---------------------------------------------------------------------
    # querying
    # ---------------------------------------------------------------------
    def get(self, id: str) -> Optional[CheckRecord]:
        for rec in self.records:
            if rec.id == id:
                return rec
        return None

    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if r.status == "fail"]

    def filtered(self, prefix: Optional[str]) -> "Report":
        if not prefix:
            return Report(records=list(self.records))
        return Report(records=[r for r in self.records if r.id.startswith(prefix)])

    def sorted(self) -> "Report":
        return Report(records=sorted(self.records, key=lambda r: r.id))

    def counts(self) -> Dict[str, int]:
        out = {"pass": 0, "fail": 0, "skip": 0}
        for r in self.records:
            out[r.status] += 1
        return out

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            res = "" if r.residual is None else f" residual={r.residual:.3e}"
            msg = f" {_clip(r.message)}" if r.message else ""
            lines.append(f"[{r.status.upper():4}] {r.id} ({r.anchor}){res}{msg}")
        c = self.counts()
        lines.append(f"overall: {self.overall} (pass={c['pass']} fail={c['fail']} skip={c['skip']})")
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.to_text()

