"""Shared pass/fail registry for the acceptance criteria."""

import sys

RESULTS: dict[int, tuple[bool, str]] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = (ok, detail)
    sys.__stdout__.write(f"\ncriterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}\n")
    sys.__stdout__.flush()
