"""Serializable diagnostics reports.

A report carries named scalars, named (x, y, y_err) series and boolean
pass flags, plus an echo of the resolved configuration.  JSON output is
deterministic (sorted keys, repr floats); the wall-clock field is the only
run-dependent entry and lives at the top level so consumers can strip it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = "1"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bool):
        return x
    if hasattr(x, "item"):
        return x.item()
    return x


@dataclass
class DiagnosticsReport:
    command: str
    config: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    schema_version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.flags.values())

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "config": _jsonable(self.config),
            "scalars": _jsonable(self.scalars),
            "series": _jsonable(self.series),
            "flags": _jsonable(self.flags),
            "passed": self.passed,
            "wall_clock": self.wall_clock,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def series_csv(self, name: str) -> str:
        rows = ["x,y,y_err"]
        for entry in self.series[name]:
            x, y, yerr = (list(entry) + [0.0])[:3]
            rows.append(f"{x!r},{y!r},{yerr!r}")
        return "\n".join(rows) + "\n"

    @staticmethod
    def from_json(text: str) -> "DiagnosticsReport":
        d = json.loads(text)
        return DiagnosticsReport(
            command=d["command"],
            config=d.get("config", {}),
            scalars=d.get("scalars", {}),
            series=d.get("series", {}),
            flags=d.get("flags", {}),
            wall_clock=d.get("wall_clock", 0.0),
            schema_version=d.get("schema_version", SCHEMA_VERSION),
        )
