"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
summaries; the same battery backs the CLI ``verify`` command.
"""

import pytest

from cmcslab.acceptance import (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
)

_RESULTS = {}


def _check(fn, *args):
    result = fn(*args) if args else fn()
    _RESULTS[fn.__name__] = result
    print(f"{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.detail}")
    assert result.passed, f"{result.name}: {result.detail}"


def test_criterion_1_tube_thresholds():
    _check(criterion_1)


def test_criterion_2_cylinder_criterion():
    _check(criterion_2)


def test_criterion_3_koiso_worked_cases():
    _check(criterion_3)


def test_criterion_4_spectrum_formulas():
    _check(criterion_4)


def test_criterion_5_jacobi_field():
    _check(criterion_5)


def test_criterion_6_bounds():
    _check(criterion_6)


def test_criterion_7_capillary_q():
    _check(criterion_7)


def test_criterion_8_kernel_quality():
    others = all(
        _RESULTS[name].passed
        for name in (
            "criterion_1", "criterion_2", "criterion_3", "criterion_4",
            "criterion_5", "criterion_6", "criterion_7",
        )
        if name in _RESULTS
    )
    _check(criterion_8, False, others)
