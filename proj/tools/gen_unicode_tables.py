#!/usr/bin/env python3
"""Regenerates src/unicode_tables.cpp from the Python unicodedata database.

Emitted tables:
  - whitespace ranges
  - punctuation (category P*) ranges
  - simple lowercase pairs (single-codepoint mappings only)
  - canonical combining classes
  - fully expanded canonical decompositions (Hangul excluded, handled
    algorithmically at runtime)
  - primary composition pairs (exclusions already filtered out)

Run from the repository root:  python3 tools/gen_unicode_tables.py
"""

import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_S_BASE, HANGUL_S_COUNT = 0xAC00, 11172


def is_hangul_syllable(cp):
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def ranges_of(pred):
    out = []
    start = None
    for cp in range(MAX_CP):
        if pred(cp):
            if start is None:
                start = cp
        elif start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def canonical_decomposition(cp):
    """One-level canonical (non-compatibility) decomposition, or None."""
    if is_hangul_syllable(cp):
        return None
    d = unicodedata.decomposition(chr(cp))
    if not d or d.startswith("<"):
        return None
    return [int(x, 16) for x in d.split()]


def full_decomposition(cp, memo):
    if cp in memo:
        return memo[cp]
    d = canonical_decomposition(cp)
    if d is None:
        memo[cp] = [cp]
        return memo[cp]
    out = []
    for part in d:
        out.extend(full_decomposition(part, memo))
    memo[cp] = out
    return out


def main():
    ws = ranges_of(lambda cp: chr(cp).isspace())
    punct = ranges_of(lambda cp: unicodedata.category(chr(cp)).startswith("P"))

    lower = []
    for cp in range(MAX_CP):
        lo = chr(cp).lower()
        if len(lo) == 1 and ord(lo) != cp:
            lower.append((cp, ord(lo)))

    ccc = [(cp, unicodedata.combining(chr(cp)))
           for cp in range(MAX_CP) if unicodedata.combining(chr(cp)) != 0]

    memo = {}
    decomp_index = []   # (cp, offset, length)
    decomp_data = []
    for cp in range(MAX_CP):
        if canonical_decomposition(cp) is None:
            continue
        expansion = full_decomposition(cp, memo)
        decomp_index.append((cp, len(decomp_data), len(expansion)))
        decomp_data.extend(expansion)

    # A pair (a, b) recomposes to cp iff NFC agrees; this drops the
    # composition exclusions without needing the exclusion list itself.
    comp = []
    for cp in range(MAX_CP):
        d = canonical_decomposition(cp)
        if d is None or len(d) != 2:
            continue
        a, b = d
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            comp.append(((a << 32) | b, cp))
    comp.sort()

    w = sys.stdout
    w.write("// Generated by tools/gen_unicode_tables.py "
            "(Unicode %s). Do not edit.\n" % unicodedata.unidata_version)
    w.write('#include "btk/unicode_tables.hpp"\n\n')
    w.write("namespace btk::detail {\n\n")

    def emit_ranges(name, rs):
        w.write("const CpRange %s[] = {\n" % name)
        for i in range(0, len(rs), 6):
            row = ", ".join("{0x%X, 0x%X}" % r for r in rs[i:i + 6])
            w.write("    %s,\n" % row)
        w.write("};\n")
        w.write("const std::size_t %s_size = %d;\n\n" % (name, len(rs)))

    emit_ranges("kWhitespaceRanges", ws)
    emit_ranges("kPunctRanges", punct)

    w.write("const CpPair kLowerPairs[] = {\n")
    for i in range(0, len(lower), 6):
        row = ", ".join("{0x%X, 0x%X}" % p for p in lower[i:i + 6])
        w.write("    %s,\n" % row)
    w.write("};\n")
    w.write("const std::size_t kLowerPairs_size = %d;\n\n" % len(lower))

    w.write("const CpByte kCombiningClass[] = {\n")
    for i in range(0, len(ccc), 6):
        row = ", ".join("{0x%X, %d}" % p for p in ccc[i:i + 6])
        w.write("    %s,\n" % row)
    w.write("};\n")
    w.write("const std::size_t kCombiningClass_size = %d;\n\n" % len(ccc))

    w.write("const DecompEntry kDecompIndex[] = {\n")
    for i in range(0, len(decomp_index), 4):
        row = ", ".join("{0x%X, %d, %d}" % e for e in decomp_index[i:i + 4])
        w.write("    %s,\n" % row)
    w.write("};\n")
    w.write("const std::size_t kDecompIndex_size = %d;\n\n" % len(decomp_index))

    w.write("const char32_t kDecompData[] = {\n")
    for i in range(0, len(decomp_data), 10):
        row = ", ".join("0x%X" % c for c in decomp_data[i:i + 10])
        w.write("    %s,\n" % row)
    w.write("};\n")
    w.write("const std::size_t kDecompData_size = %d;\n\n" % len(decomp_data))

    w.write("const CompEntry kCompPairs[] = {\n")
    for i in range(0, len(comp), 4):
        row = ", ".join("{0x%XULL, 0x%X}" % e for e in comp[i:i + 4])
        w.write("    %s,\n" % row)
    w.write("};\n")
    w.write("const std::size_t kCompPairs_size = %d;\n\n" % len(comp))

    w.write("}  // namespace btk::detail\n")


if __name__ == "__main__":
    main()
