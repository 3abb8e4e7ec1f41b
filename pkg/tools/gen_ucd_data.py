#!/usr/bin/env python3
"""Regenerate the bundled UCD property files from installed library data.

Writes src/scriptbpe/data/Scripts.txt and DerivedGeneralCategory.txt in the
standard UCD range-list format.  Sources:

  * script property: fontTools.unicodedata.Scripts (compiled from Scripts.txt)
  * general category: the `regex` module's \\p{..} tables

Both must carry the same Unicode version or the output would be self
inconsistent; the script cross-validates them (Script=Unknown must coincide
exactly with general category Cn/Co/Cs) and refuses to write on mismatch.

Run offline; the network is never touched.  Output is deterministic.
"""

from __future__ import annotations

import bisect
import sys
from pathlib import Path

import regex
from fontTools.unicodedata import Scripts, script_name

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "scriptbpe" / "data"

MAX_CP = 0x110000

GENERAL_CATEGORIES = [
    "Lu", "Ll", "Lt", "Lm", "Lo", "Mn", "Mc", "Me",
    "Nd", "Nl", "No",
    "Pc", "Pd", "Ps", "Pe", "Pi", "Pf", "Po",
    "Sm", "Sc", "Sk", "So",
    "Zs", "Zl", "Zp",
    "Cc", "Cf", "Co",
]


def ucd_version_from_scripts_module() -> str:
    header = Path(Scripts.__file__).read_text(encoding="utf-8")
    for line in header.splitlines()[:20]:
        if line.startswith("# Scripts-") and line.endswith(".txt"):
            return line[len("# Scripts-"):-len(".txt")]
    raise SystemExit("cannot determine Unicode version from fontTools Scripts data")


def build_category_table() -> list[str | None]:
    """Per-codepoint general category; None means Cn (unassigned)."""
    cats: list[str | None] = [None] * MAX_CP
    # one searchable string of all non-surrogate codepoints
    index = [cp for cp in range(MAX_CP) if not 0xD800 <= cp <= 0xDFFF]
    haystack = "".join(map(chr, index))
    for gc in GENERAL_CATEGORIES:
        pat = regex.compile(rf"\p{{{gc}}}")
        for m in pat.finditer(haystack):
            cats[index[m.start()]] = gc
    for cp in range(0xD800, 0xE000):
        cats[cp] = "Cs"
    return cats


def script_at(cp: int) -> str:
    code = Scripts.VALUES[bisect.bisect_right(Scripts.RANGES, cp) - 1]
    return script_name(code).replace(" ", "_")


def cross_validate(cats: list[str | None]) -> None:
    bad = []
    for cp in range(MAX_CP):
        unknown = script_at(cp) == "Unknown"
        filtered = cats[cp] in (None, "Co", "Cs")
        if unknown != filtered:
            bad.append(cp)
            if len(bad) > 20:
                break
    if bad:
        raise SystemExit(
            f"script/category tables disagree at {len(bad)}+ codepoints, "
            f"first: U+{bad[0]:04X}; library Unicode versions likely differ"
        )


def ranges_of(values: list[str | None]) -> list[tuple[int, int, str]]:
    """Collapse the per-codepoint list into (lo, hi, value) runs, skipping None."""
    out = []
    run_start = None
    run_val = None
    for cp, val in enumerate(values):
        if val != run_val:
            if run_val is not None:
                out.append((run_start, cp - 1, run_val))
            run_start, run_val = cp, val
    if run_val is not None:
        out.append((run_start, MAX_CP - 1, run_val))
    return out


def format_lines(runs: list[tuple[int, int, str]]) -> list[str]:
    lines = []
    for lo, hi, val in runs:
        cps = f"{lo:04X}" if lo == hi else f"{lo:04X}..{hi:04X}"
        lines.append(f"{cps:<14}; {val}")
    return lines


def main() -> None:
    version = ucd_version_from_scripts_module()
    print(f"fontTools script data: Unicode {version}")
    cats = build_category_table()
    print(f"categorized {sum(c is not None for c in cats):,} assigned codepoints")
    cross_validate(cats)
    print("script/category cross-validation passed")

    scripts = [None if (s := script_at(cp)) == "Unknown" else s for cp in range(MAX_CP)]

    OUT_DIR.mkdir(parents=True, exist_ok=True)

    scripts_path = OUT_DIR / "Scripts.txt"
    with scripts_path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(f"# Scripts-{version}.txt\n")
        f.write("# Regenerated from installed Unicode property tables"
                " by tools/gen_ucd_data.py; range-list format as published"
                " in the Unicode Character Database.\n")
        f.write("# @missing: 0000..10FFFF; Unknown\n\n")
        f.write("\n".join(format_lines(ranges_of(scripts))))
        f.write("\n")
    print(f"wrote {scripts_path} ({scripts_path.stat().st_size:,} bytes)")

    gc_path = OUT_DIR / "DerivedGeneralCategory.txt"
    with gc_path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(f"# DerivedGeneralCategory-{version}.txt\n")
        f.write("# Regenerated from installed Unicode property tables"
                " by tools/gen_ucd_data.py; unassigned (Cn) ranges omitted.\n")
        f.write("# @missing: 0000..10FFFF; Cn\n\n")
        f.write("\n".join(format_lines(ranges_of(cats))))
        f.write("\n")
    print(f"wrote {gc_path} ({gc_path.stat().st_size:,} bytes)")


if __name__ == "__main__":
    sys.exit(main())
