#!/usr/bin/env python3
"""Rewrite demo golden files.

With no arguments every existing golden is regenerated at its own depth.
Otherwise pass ``name`` or ``name:depth`` items.
"""
import argparse
import re
import sys

from pglc.cli import ALIASES, corpus_dir, main


def existing():
    for p in sorted((corpus_dir() / "goldens").glob("*.json")):
        m = re.fullmatch(r"(.+)-d(\d+)\.json", p.name)
        if m:
            yield m.group(1), int(m.group(2))


def parse(item: str):
    name, _, depth = item.partition(":")
    return ALIASES.get(name, name), int(depth or 4)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("items", nargs="*", help="name or name:depth")
    args = ap.parse_args()
    todo = [parse(i) for i in args.items] or list(existing())
    failed = 0
    for name, depth in todo:
        code = main(["demo", name, "--depth", str(depth), "--regen"])
        failed += code != 0
    sys.exit(1 if failed else 0)
