"""Canonical JSON helpers: decimal-string integers, byte-stable output.

All integers that can exceed machine words are serialized as decimal
strings, never as JSON numbers, so files survive any JSON parser intact.
Canonical form (sorted keys, compact separators, trailing newline) makes
replay runs byte-identical.
"""

import json
import sys

# Stage scales produce integers with hundreds of thousands of digits;
# lift CPython's int<->str conversion guard once, at import.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


def int_to_dec(n: int) -> str:
    return str(int(n))


def dec_to_int(s: str) -> int:
    return int(s, 10)


def ints_to_dec(seq) -> list:
    return [int_to_dec(n) for n in seq]


def dec_to_ints(seq) -> list:
    return [dec_to_int(s) for s in seq]


def canonical_dumps(obj) -> str:
    """Serialize a JSON-ready object deterministically."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


def write_canonical(path, obj) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(canonical_dumps(obj))


def read_json(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)
