"""Data generators for cohort, case-control and matched stratified sampling.

All generators take an integer seed and draw from a Philox stream, so the
same seed gives the same dataset on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .likelihoods import CountData
from .model import CovariateSpace, JointTable
from .stratified import StratifiedData

RNG_ALGORITHM = "numpy.random.Philox (4x64, counter-based)"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class DesignSpec:
    """Sampling design: ``prospective`` (n), ``case_control`` (n0, n1) or
    ``stratified_matched`` (cases, controls per stratum, number of strata)."""

    kind: Literal["prospective", "case_control", "stratified_matched"]
    n: int = 0
    n0: int = 0
    n1: int = 0
    cases: int = 1
    controls: int = 1
    strata: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind == "prospective":
            if self.n < 0:
                raise ValueError("sample size must be non-negative")
        elif self.kind == "case_control":
            if self.n0 < 0 or self.n1 < 0:
                raise ValueError("arm sizes must be non-negative")
        elif self.kind == "stratified_matched":
            if self.cases < 1 or self.controls < 1:
                raise ValueError("matched designs need at least one case and one control per stratum")
            if self.strata < 0:
                raise ValueError("number of strata must be non-negative")
        else:
            raise ValueError(f"unknown design kind {self.kind!r}")


def sample_prospective(theta: JointTable, space: CovariateSpace, n: int, seed: int) -> CountData:
    """Multinomial(n, theta) over the cells of X x {0, 1}."""
    if n < 0:
        raise ValueError("sample size must be non-negative")
    rng = make_rng(seed)
    p = theta.probs.ravel()
    counts = rng.multinomial(n, p / p.sum()).reshape(theta.probs.shape)
    return CountData(space, counts)


def _inverse_cdf_counts(rng: np.random.Generator, probs: np.ndarray, n: int) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return np.bincount(np.minimum(idx, probs.size - 1), minlength=probs.size)


def sample_case_control(theta: JointTable, space: CovariateSpace, n0: int, n1: int, seed: int) -> CountData:
    """n0 controls from ``theta_{X|0}`` and n1 cases from ``theta_{X|1}``."""
    if n0 < 0 or n1 < 0:
        raise ValueError("arm sizes must be non-negative")
    gamma = theta.gamma
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"case probability {gamma} leaves one arm undefined")
    rng = make_rng(seed)
    counts = np.stack([_inverse_cdf_counts(rng, theta.x_given_y(0).probs, n0),
                       _inverse_cdf_counts(rng, theta.x_given_y(1).probs, n1)], axis=1)
    return CountData(space, counts)


def sample_stratified_matched(tables: Sequence[JointTable], space: CovariateSpace, cases: int, controls: int,
                              strata: int, seed: int) -> StratifiedData:
    """``strata`` matched sets with ``cases`` cases and ``controls`` controls each.

    Stratum s uses ``tables[s % len(tables)]``.
    """
    if cases < 1 or controls < 1:
        raise ValueError("matched designs need at least one case and one control per stratum")
    if strata == 0:
        return StratifiedData((), matching=())
    rng = make_rng(seed)
    out = []
    for s in range(strata):
        t = tables[s % len(tables)]
        if not 0.0 < t.gamma < 1.0:
            raise ValueError(f"stratum {s} has a degenerate case probability")
        counts = np.stack([_inverse_cdf_counts(rng, t.x_given_y(0).probs, controls),
                           _inverse_cdf_counts(rng, t.x_given_y(1).probs, cases)], axis=1)
        out.append(CountData(space, counts))
    return StratifiedData(tuple(out), matching=tuple((cases, controls) for _ in range(strata)))


def simulate(design: DesignSpec, tables: Sequence[JointTable], space: CovariateSpace):
    """Dispatch on ``design.kind``."""
    if design.kind == "prospective":
        return sample_prospective(tables[0], space, design.n, design.seed)
    if design.kind == "case_control":
        return sample_case_control(tables[0], space, design.n0, design.n1, design.seed)
    return sample_stratified_matched(tables, space, design.cases, design.controls, design.strata, design.seed)


__all__ = ["RNG_ALGORITHM", "make_rng", "DesignSpec", "sample_prospective", "sample_case_control",
           "sample_stratified_matched", "simulate"]
