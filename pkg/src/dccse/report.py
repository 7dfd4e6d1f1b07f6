"""Report documents emitted by the command-line driver.

Reports are JSON with sorted keys. Everything except the ``timings`` object
is a deterministic function of the command line and seed.
"""
from __future__ import annotations

import json
from typing import Dict, List, Optional

SCHEMA_VERSION = 1

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "dccse report",
    "type": "object",
    "required": ["schema_version", "command", "config", "checks", "passed",
                 "statistics", "operation_counts", "timings"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["correctness", "attack", "sim", "bench"]},
        "config": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed"],
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "detail": {},
                },
                "additionalProperties": False,
            },
        },
        "passed": {"type": "boolean"},
        "verdict": {"type": "string"},
        "statistics": {"type": "object"},
        "operation_counts": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": {"type": "integer", "minimum": 0},
            },
        },
        "timings": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0},
        },
    },
}


def make_report(command: str, config: dict, checks: List[dict],
                statistics: Optional[dict] = None,
                operation_counts: Optional[Dict[str, Dict[str, int]]] = None,
                timings: Optional[Dict[str, float]] = None,
                verdict: Optional[str] = None) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "statistics": statistics or {},
        "operation_counts": operation_counts or {},
        "timings": timings or {},
    }
    if verdict is not None:
        report["verdict"] = verdict
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def without_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}
