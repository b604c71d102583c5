"""Result records: one JSON object per line for scripts, a pandas table for humans"""

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, TextIO

import pandas as pd

import config

METHOD_TAGS = ("exact-count", "quadrature", "monte-carlo", "truncated-series", "probe", "check")


NON_FINITE = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


def _clean(value):
    """JSON-safe copy: non-finite floats become "NaN"/"Infinity"/"-Infinity", tuples become lists."""
    if isinstance(value, float):
        if math.isfinite(value):
            return value
        return "NaN" if math.isnan(value) else ("Infinity" if value > 0 else "-Infinity")
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return _clean(value.item())
    return value


def _restore(value):
    """Inverse of _clean for the non-finite markers."""
    if isinstance(value, str):
        return NON_FINITE.get(value, value)
    if isinstance(value, dict):
        return {k: _restore(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_restore(v) for v in value]
    return value


@dataclass
class ResultRecord:
    command: str
    inputs: Dict[str, object] = field(default_factory=dict)
    outputs: Dict[str, object] = field(default_factory=dict)
    provenance: Dict[str, str] = field(default_factory=dict)
    elapsed: Optional[float] = None
    version: str = config.TOOLKIT_VERSION

    def add(self, name: str, value, method: str) -> "ResultRecord":
        """Attach one named output together with its method tag."""
        if method not in METHOD_TAGS:
            raise ValueError(f"unknown method tag {method!r}")
        self.outputs[name] = value
        self.provenance[name] = method
        return self

    def to_dict(self, timings: bool = False) -> Dict[str, object]:
        data = {
            "command": self.command,
            "inputs": _clean(self.inputs),
            "outputs": _clean(self.outputs),
            "provenance": dict(self.provenance),
            "version": self.version,
        }
        if timings and self.elapsed is not None:
            data["elapsed"] = round(self.elapsed, 6)
        return data

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, separators=(",", ":"), allow_nan=False)

    @classmethod
    def from_json(cls, line: str) -> "ResultRecord":
        data = json.loads(line)
        return cls(
            command=data["command"],
            inputs=_restore(data.get("inputs", {})),
            outputs=_restore(data.get("outputs", {})),
            provenance=data.get("provenance", {}),
            elapsed=data.get("elapsed"),
            version=data.get("version", config.TOOLKIT_VERSION),
        )


def _scalar(value) -> bool:
    return not isinstance(value, (dict, list, tuple))


def records_frame(records: Iterable[ResultRecord]) -> pd.DataFrame:
    """Flat table: scalar inputs and outputs as columns, one row per record."""
    rows: List[Dict[str, object]] = []
    for record in records:
        row = {"command": record.command}
        row.update({k: v for k, v in _clean(record.inputs).items() if _scalar(v)})
        row.update({k: v for k, v in _clean(record.outputs).items() if _scalar(v)})
        rows.append(row)
    return pd.DataFrame(rows)


def emit(records: List[ResultRecord], stream: TextIO, fmt: str = "table", timings: bool = False) -> None:
    """Write records as JSON lines or as a human-readable table."""
    if fmt == "jsonl":
        for record in records:
            stream.write(record.to_json(timings) + "\n")
        return
    frame = records_frame(records)
    if frame.empty:
        stream.write("(no results)\n")
        return
    with pd.option_context("display.max_columns", None, "display.width", 200,
                           "display.float_format", "{:.10g}".format):
        stream.write(frame.to_string(index=False) + "\n")


def read_records(path: str) -> List[ResultRecord]:
    with open(path, encoding="utf-8") as fh:
        return [ResultRecord.from_json(line) for line in fh if line.strip()]
