"""Published JSON schemas for every subcommand's JSON output.

Each schema is self-contained (no cross-file references), so a plain
``jsonschema.validate(payload, load(name))`` works without a resolver.
"""
from __future__ import annotations

import json
from importlib import resources

# operation name -> schema file covering its JSON output
SCHEMA_FOR = {
    "partial-sums": "partial-sums.schema.json",
    "series-eval": "series-eval.schema.json",
    "baker": "baker.schema.json",
    "l-eval": "l-eval.schema.json",
    "fe-check": "fe-check.schema.json",
    "plancherel-check": "plancherel-check.schema.json",
    "spike-scan": "spike-scan.schema.json",
    "omega-fit": "omega-fit.schema.json",
    "sweep-manifest": "sweep-manifest.schema.json",
}


def load(name: str) -> dict:
    """Load a schema by operation name or file name."""
    fname = SCHEMA_FOR.get(name, name)
    text = resources.files(__package__).joinpath(fname).read_text()
    return json.loads(text)
