#!/usr/bin/env python3
"""Rewrites the embedded copy of models/foundry_reference.cmdl in reference.hpp."""
import pathlib
import re

root = pathlib.Path(__file__).resolve().parent.parent
text = (root / "models" / "foundry_reference.cmdl").read_text()
header = root / "include" / "castcost" / "reference.hpp"
src = header.read_text()
new, n = re.subn(r'R"cmdl\(.*?\)cmdl"', lambda _: 'R"cmdl(' + text + ')cmdl"', src, flags=re.S)
if n != 1:
    raise SystemExit("embedded model literal not found")
header.write_text(new)
