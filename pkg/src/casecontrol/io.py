"""Reading datasets and prior documents, writing reports.

Dataset CSV: a header row with ``x1..xk``, ``y`` and optionally ``s``
(stratum label) and ``count`` (positive integer weight, default 1).
Prior files and reports are JSON objects carrying a versioned ``schema``.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .errors import DataFormatError, NotIdentifiable
from .likelihoods import CountData
from .model import CovariateSpace
from .priors import (ConditionedLogisticPrior, GFunction, LogisticJointLaw, PseudoCounts,
                     independent_gaussian_law, tilted_x_law)
from .stratified import StratifiedData, StratifiedJointLaw, StratifiedPrior, stratified_gaussian_law

PRIOR_SCHEMA = "casecontrol.prior/1"
REPORT_SCHEMA_PREFIX = "casecontrol."


# --------------------------------------------------------------------------
# datasets


def _parse_rows(path: Union[str, Path]):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataFormatError("dataset has no header row")
    header = [h.strip() for h in rows[0]]
    if "y" not in header:
        raise DataFormatError("dataset needs a 'y' column")
    xcols = [h for h in header if h.startswith("x")]
    expected = [f"x{j + 1}" for j in range(len(xcols))]
    if xcols != expected:
        raise DataFormatError(f"covariate columns must be named x1..xk in order, got {xcols}")
    unknown = set(header) - set(xcols) - {"y", "s", "count"}
    if unknown:
        raise DataFormatError(f"unknown columns {sorted(unknown)}")
    if len(set(header)) != len(header):
        raise DataFormatError("duplicate column names")
    col = {h: i for i, h in enumerate(header)}
    xs, ys, ss, ws = [], [], [], []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise DataFormatError(f"line {lineno}: expected {len(header)} fields, got {len(r)}")
        try:
            x = [float(r[col[c]]) for c in xcols]
            y = int(r[col["y"]])
            w = int(r[col["count"]]) if "count" in col else 1
        except ValueError:
            raise DataFormatError(f"line {lineno}: non-numeric entry") from None
        if y not in (0, 1):
            raise DataFormatError(f"line {lineno}: y must be 0 or 1")
        if w < 1:
            raise DataFormatError(f"line {lineno}: count must be a positive integer")
        if not all(np.isfinite(x)):
            raise DataFormatError(f"line {lineno}: covariates must be finite")
        xs.append(x)
        ys.append(y)
        ws.append(w)
        ss.append(r[col["s"]].strip() if "s" in col else None)
    return xcols, xs, ys, ss, ws, "s" in col


def load_dataset(path: Union[str, Path], space: Optional[CovariateSpace] = None
                 ) -> Union[CountData, StratifiedData]:
    """Aggregate a record CSV into counts.

    Without ``space`` the covariate points are taken in order of first
    appearance.  A file with an ``s`` column gives :class:`StratifiedData`.
    """
    xcols, xs, ys, ss, ws, stratified = _parse_rows(path)
    if not xcols:
        raise NotIdentifiable("dataset has no covariate columns")
    k = len(xcols)
    if space is None:
        if not xs:
            raise DataFormatError("an empty dataset needs a covariate space (pass a prior)")
        space = CovariateSpace(np.array(list(dict.fromkeys(map(tuple, xs)))))
    elif space.k != k:
        raise DataFormatError(f"dataset has {k} covariates, the prior's space has {space.k}")
    xs_arr = np.array(xs, dtype=float).reshape(len(ys), k)
    try:
        if stratified:
            return StratifiedData.from_records(space, xs_arr, ys, ss, ws)
        return CountData.from_records(space, xs_arr, ys, ws)
    except KeyError as exc:
        raise DataFormatError(f"covariate value {exc} is not in the prior's covariate space") from None


def write_dataset(path: Union[str, Path], data: Union[CountData, StratifiedData]) -> None:
    """Write counts as an aggregated record CSV (one row per non-empty cell)."""
    strata = data.strata if isinstance(data, StratifiedData) else (data,)
    k = data.space.k if strata else 1
    header = [f"x{j + 1}" for j in range(k)] + ["y"]
    if isinstance(data, StratifiedData):
        header.append("s")
    header.append("count")
    lines = [",".join(header)]
    for s, d in enumerate(strata):
        for i, p in enumerate(d.space.points):
            for y in (0, 1):
                c = int(d.counts[i, y])
                if c == 0:
                    continue
                row = [repr(float(v)) for v in p] + [str(y)]
                if isinstance(data, StratifiedData):
                    row.append(str(s + 1))
                row.append(str(c))
                lines.append(",".join(row))
    atomic_write(path, "\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# prior documents


def _g_from_doc(doc: Optional[dict]) -> GFunction:
    if doc is None:
        return GFunction.constant()
    kind = doc.get("kind", "constant")
    if kind == "constant":
        return GFunction.constant()
    if kind == "gaussian":
        return GFunction.gaussian(doc["mean"], doc["cov"])
    if kind == "tabulated":
        return GFunction.tabulated(doc["grid"], doc["values"])
    raise DataFormatError(f"unknown g kind {kind!r}")


def g_to_doc(g: GFunction) -> dict:
    if g.kind == "gaussian":
        return {"kind": "gaussian", "mean": g.mean.tolist(), "cov": g.cov.tolist()}
    if g.kind == "tabulated":
        return {"kind": "tabulated", "grid": g.grid.tolist(), "values": g.values.tolist()}
    return {"kind": "constant"}


def prior_from_doc(doc: dict):
    """Build a prior object from a parsed prior document."""
    if doc.get("schema") != PRIOR_SCHEMA:
        raise DataFormatError(f"prior schema must be {PRIOR_SCHEMA!r}, got {doc.get('schema')!r}")
    try:
        space = CovariateSpace(np.array(doc["points"], dtype=float).reshape(len(doc["points"]), -1))
        family = doc.get("family", "conditioned")
        g = _g_from_doc(doc.get("g"))
        if family == "conditioned":
            if "pseudo_counts_by_stratum" in doc:
                return StratifiedPrior(space, np.array(doc["pseudo_counts_by_stratum"], dtype=float), g)
            return ConditionedLogisticPrior(space, PseudoCounts(np.array(doc["pseudo_counts"], dtype=float)), g,
                                            int(doc.get("reference", 0)))
        if family == "independent_gaussian":
            opts = dict(alpha_sd=float(doc.get("alpha_sd", 1.0)), beta_sd=float(doc.get("beta_sd", 1.0)),
                        x_concentration=float(doc.get("x_concentration", 1.0)))
            if "strata" in doc:
                return stratified_gaussian_law(space, int(doc["strata"]), **opts)
            return independent_gaussian_law(space, **opts)
        if family == "tilted_x":
            base = ConditionedLogisticPrior(space, PseudoCounts(np.array(doc["pseudo_counts"], dtype=float)), g)
            return tilted_x_law(base, float(doc.get("strength", 1.0)))
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"malformed prior document: {exc!r}") from None
    raise DataFormatError(f"unknown prior family {family!r}")


def load_prior(path: Union[str, Path]):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read prior {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise DataFormatError("prior document must be a JSON object")
    return prior_from_doc(doc), doc


def prior_space(prior) -> CovariateSpace:
    if isinstance(prior, (ConditionedLogisticPrior, LogisticJointLaw, StratifiedPrior, StratifiedJointLaw)):
        return prior.space
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


def conditioned_prior_doc(prior: Union[ConditionedLogisticPrior, StratifiedPrior]) -> dict:
    doc = {"schema": PRIOR_SCHEMA, "family": "conditioned", "points": prior.space.points.tolist(),
           "g": g_to_doc(prior.g)}
    if isinstance(prior, StratifiedPrior):
        doc["pseudo_counts_by_stratum"] = prior.a.tolist()
    else:
        doc["pseudo_counts"] = prior.a.a.tolist()
        doc["reference"] = prior.reference
    return doc


# --------------------------------------------------------------------------
# output


def _default(obj: Any):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc: dict) -> str:
    """JSON text; floats use the shortest round-trip representation."""
    return json.dumps(doc, indent=2, default=_default, sort_keys=False) + "\n"


def atomic_write(path: Union[str, Path], text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Union[str, Path], doc: dict) -> None:
    atomic_write(path, dumps(doc))


def write_grid(path: Union[str, Path], beta: np.ndarray, density: np.ndarray) -> None:
    lines = ["beta,density"] + [f"{b!r},{d!r}" for b, d in zip(beta.tolist(), density.tolist())]
    atomic_write(path, "\n".join(lines) + "\n")


__all__ = ["PRIOR_SCHEMA", "load_dataset", "write_dataset", "prior_from_doc", "load_prior", "prior_space",
           "conditioned_prior_doc", "g_to_doc", "dumps", "atomic_write", "write_json", "write_grid"]
