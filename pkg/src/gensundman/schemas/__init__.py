"""JSON Schemas for every ``--format json`` payload of the command line."""

import json
from importlib import resources

NAMES = ("check_report", "parse", "invariants", "transform", "verify", "solve", "error")

COMMAND_SCHEMA = {
    "parse": "parse",
    "invariants": "invariants",
    "check": "check_report",
    "dms-check": "check_report",
    "lie-check": "check_report",
    "transform": "transform",
    "verify": "verify",
    "solve": "solve",
}


def load(name: str) -> dict:
    with resources.files(__name__).joinpath(f"{name}.schema.json").open(encoding="utf-8") as fh:
        return json.load(fh)
