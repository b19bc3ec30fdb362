#!/usr/bin/env python3
# Copyright 2026 The wiresec Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validates the fixtures and every subcommand's JSON report against schemas/."""

import argparse
import json
import pathlib
import subprocess
import sys

import jsonschema


def load(path):
    with open(path) as f:
        return json.load(f)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True, help="path to the wiresec binary")
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--fixtures", required=True, type=pathlib.Path)
    args = ap.parse_args()

    schemas = {p.name.removesuffix(".schema.json"): load(p) for p in args.schemas.glob("*.schema.json")}
    for s in schemas.values():
        jsonschema.Draft202012Validator.check_schema(s)

    failures = 0

    def check(label, doc, schema):
        nonlocal failures
        errors = sorted(jsonschema.Draft202012Validator(schemas[schema]).iter_errors(doc), key=str)
        if errors:
            failures += 1
            print(f"FAIL {label}: {errors[0].message} at {list(errors[0].absolute_path)}")
        else:
            print(f"ok   {label}")

    for path in sorted(args.fixtures.glob("*.json")):
        check(path.name, load(path), "code" if path.name.endswith("-code.json") else "network")

    def files(name):
        return ["--network", str(args.fixtures / f"{name}.json"), "--code", str(args.fixtures / f"{name}-code.json")]

    runs = [
        ("analyze", files("butterfly"), "analyze"),
        ("analyze", files("leaky"), "analyze"),
        ("oracle", files("index-coding"), "oracle"),
        ("oracle", files("ambiguous"), "oracle"),
        ("osrb", ["--n", "2,4", "--trials", "4"], "experiment"),
        ("osrb", files("leak3") + ["--observer", "tap", "--n", "1,2", "--trials", "2"], "experiment"),
        ("sw", ["--n", "4", "--trials", "2", "--samples", "8"], "experiment"),
        ("chansim", ["--n", "4,6", "--trials", "4", "--kind", "linear"], "experiment"),
        ("chansim", ["--n", "4", "--trials", "4"], "experiment"),
        ("weak2strong", files("leak3") + ["--observer", "tap", "--sink", "t", "--n", "1,2", "--trials", "2",
                                          "--samples", "4"], "weak2strong"),
    ]
    for cmd, extra, schema in runs:
        proc = subprocess.run([args.cli, cmd] + extra, capture_output=True, text=True)
        label = " ".join([cmd] + [pathlib.Path(a).name if "/" in a else a for a in extra])
        if proc.returncode != 0:
            failures += 1
            print(f"FAIL {label}: exit {proc.returncode}: {proc.stderr.strip()}")
            continue
        check(label, json.loads(proc.stdout), schema)

    print(f"{failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
