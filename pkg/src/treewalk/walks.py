"""Named example walks used throughout the tests and demos."""
from __future__ import annotations

from .group_tree import GroupSpec
from .walk_kernel import StepMeasure


def z2_cubed() -> GroupSpec:
    return GroupSpec(involutions="abc")


def free_group_2() -> GroupSpec:
    return GroupSpec(free="st")


def nn3() -> StepMeasure:
    """Simple random walk on the 3-regular tree."""
    return StepMeasure.uniform(z2_cubed(), ["a", "b", "c"])


def w1() -> StepMeasure:
    return StepMeasure.uniform(z2_cubed(), ["a", "b", "c", "ab"])


def w2() -> StepMeasure:
    return StepMeasure.uniform(z2_cubed(), ["a", "ac", "ba"])


def w3() -> StepMeasure:
    return StepMeasure.uniform(z2_cubed(), ["a", "ab", "ac"])


def f2() -> StepMeasure:
    """Simple random walk on the free group of rank two."""
    return StepMeasure.uniform(free_group_2(), ["s", "s^", "t", "t^"])


NAMED = {"nn3": nn3, "w1": w1, "w2": w2, "w3": w3, "f2": f2}
