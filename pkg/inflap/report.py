"""
Check reports shared by the verifiers.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from dataclasses import dataclass, field
from typing import Any

from inflap.const import CheckStatus
from inflap.metric_graph import GraphPoint
from inflap.numeric import Scalar, format_scalar


@dataclass(frozen=True)
class Witness:
    """A point where a check failed, with the size of the violation."""

    point: GraphPoint | None
    defect: Scalar | None = None
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.point is not None:
            out.update(self.point.to_dict())
        if self.defect is not None:
            out["defect"] = float(self.defect)
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class CheckReport:
    check: str
    status: CheckStatus
    witnesses: tuple[Witness, ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASS

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "check": self.check,
            "status": str(self.status),
            "witnesses": [w.to_dict() for w in self.witnesses],
        }
        for key, value in self.details.items():
            out[key] = _jsonable(value)
        return out


def verdict(check: str, witnesses: list[Witness], **details: Any) -> CheckReport:
    status = CheckStatus.FAIL if witnesses else CheckStatus.PASS
    return CheckReport(check, status, tuple(witnesses), dict(details))


def inapplicable(check: str, reason: str, **details: Any) -> CheckReport:
    return CheckReport(check, CheckStatus.INAPPLICABLE, (), {"reason": reason, **details})


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, CheckReport):
        return value.to_dict()
    if isinstance(value, GraphPoint):
        return value.to_dict()
    if isinstance(value, (str, bool)) or value is None:
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value if value == value and abs(value) != float("inf") else str(value)
    try:
        return format_scalar(value)
    except TypeError:
        return str(value)
