#!/usr/bin/env python3
# Copyright (C) 2026 The cgrg Authors
# SPDX-License-Identifier: Apache-2.0
"""Validates every <schema>.<tag>.json sample against schemas/v1/<schema>.schema.json."""

import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def main() -> int:
    if len(sys.argv) != 3:
        print("usage: validate_schemas.py SCHEMA_DIR SAMPLE_DIR", file=sys.stderr)
        return 2
    schema_dir, sample_dir = map(pathlib.Path, sys.argv[1:])
    schemas = {}
    for path in sorted(schema_dir.glob("*.schema.json")):
        body = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(body)
        schemas[path.name.removesuffix(".schema.json")] = body
    registry = Registry().with_resources(
        (body["$id"], Resource.from_contents(body)) for body in schemas.values()
    )

    samples = sorted(sample_dir.glob("*.json"))
    if not samples:
        print(f"no samples in {sample_dir}", file=sys.stderr)
        return 1
    covered = set()
    failures = 0
    for sample in samples:
        name = sample.name.split(".", 1)[0]
        if name not in schemas:
            print(f"FAIL {sample.name}: no schema named {name}")
            failures += 1
            continue
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = list(validator.iter_errors(json.loads(sample.read_text())))
        for e in errors:
            print(f"FAIL {sample.name}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
        failures += bool(errors)
        covered.add(name)
    unused = sorted(set(schemas) - covered)
    if unused:
        print(f"FAIL no samples for: {', '.join(unused)}")
        failures += 1
    print(f"{len(samples)} samples against {len(schemas)} schemas, {failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
