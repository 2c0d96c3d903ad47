"""Sales-index model: fit exposure counts to year-over-year sales change.

Pipeline: covariance PCA of the seven daily viewer counts, then OLS of
the retained principal-component scores against the sales index.  The
fitted model exposes per-viewer impacts (regression coefficients pulled
back through the eigenvectors) and per-group impacts (impacts scaled by
period viewer totals).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Sequence, TextIO

import numpy as np

from .exposure import ExposureMatrix
from .graph import _atomic_write
from .numerics import NumericsError, OlsResult, PcaResult, ols, pca, project

MODEL_FORMAT_VERSION = 1

YEAR_OFFSET_DAYS = 364  # same weekday one year back


class SalesModelError(ValueError):
    pass


def sales_index(sales_t: float, sales_prev: float) -> float:
    """Year-over-year relative change: sales_t / sales_prev - 1."""
    if sales_prev <= 0:
        raise SalesModelError("previous-year sales must be positive")
    return sales_t / sales_prev - 1.0


@dataclass(frozen=True)
class SalesSeries:
    days: tuple[date, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != (len(self.days),):
            raise SalesModelError("values length must match days")
        for a, b in zip(self.days, self.days[1:]):
            if b <= a:
                raise SalesModelError("days must be strictly increasing")

    @classmethod
    def from_raw(
        cls, days: Sequence[date], sales: Sequence[float], sales_prev: Sequence[float]
    ) -> "SalesSeries":
        vals = [sales_index(s, p) for s, p in zip(sales, sales_prev)]
        return cls(tuple(days), np.array(vals))

    def to_csv(self, path: str | os.PathLike, header_comments: Sequence[str] = ()) -> None:
        lines = [f"# {c}" for c in header_comments]
        lines.append("date,sales_index")
        for d, v in zip(self.days, self.values):
            lines.append(f"{d.isoformat()},{float(v)!r}")
        _atomic_write(path, "\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, stream: TextIO | Iterable[str]) -> "SalesSeries":
        """Accepts `date,sales_index` or `date,sales,sales_prev_year`."""
        days: list[date] = []
        vals: list[float] = []
        mode: str | None = None
        for line in stream:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if mode is None:
                if parts == ["date", "sales_index"]:
                    mode = "index"
                elif parts == ["date", "sales", "sales_prev_year"]:
                    mode = "raw"
                else:
                    raise SalesModelError(f"unrecognized sales header {line!r}")
                continue
            days.append(date.fromisoformat(parts[0]))
            if mode == "index":
                vals.append(float(parts[1]))
            else:
                vals.append(sales_index(float(parts[1]), float(parts[2])))
        return cls(tuple(days), np.array(vals))


def sum_index(series: SalesSeries) -> float:
    """Period total of the (predicted or observed) sales index."""
    return float(series.values.sum())


@dataclass(frozen=True)
class FittedSalesModel:
    pca: PcaResult
    k: int
    coefficients: np.ndarray  # length k
    intercept: float
    diagnostics: OlsResult
    train_days: tuple[date, ...]

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def per_viewer_impacts(self) -> np.ndarray:
        return per_viewer_impacts(self)


def fit(
    matrix: ExposureMatrix,
    sales: SalesSeries,
    k: int = 4,
    *,
    drop_nonsignificant: bool = False,
    alpha: float = 0.05,
) -> FittedSalesModel:
    """PCA the seven viewer-count columns, regress k scores on the index.

    `drop_nonsignificant` zeroes coefficients whose p-value exceeds
    `alpha`; because centered PC scores are exactly uncorrelated this
    equals refitting without those components (intercept included).
    """
    if matrix.days != sales.days:
        raise SalesModelError("exposure matrix and sales series cover different days")
    n = len(matrix.days)
    if n <= k + 1:
        raise SalesModelError(f"need more than {k + 1} days to retain {k} components")
    p = pca(matrix.counts)
    scores = project(p, matrix.counts, k)
    try:
        diag = ols(scores, sales.values)
    except NumericsError as e:
        raise SalesModelError(str(e)) from e
    coef = diag.coefficients.copy()
    if drop_nonsignificant:
        coef[diag.p_values[:k] > alpha] = 0.0
    return FittedSalesModel(
        pca=p,
        k=k,
        coefficients=coef,
        intercept=diag.intercept,
        diagnostics=diag,
        train_days=matrix.days,
    )


def per_viewer_impacts(model: FittedSalesModel) -> np.ndarray:
    """Impact of one extra class member on the daily index (7-vector)."""
    return impacts_from(model.pca.eigenvectors[: model.k], model.coefficients)


def impacts_from(eigenvectors: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """impact_j = sum_i a_i * e_ij over the retained components."""
    e = np.asarray(eigenvectors, dtype=np.float64)
    a = np.asarray(coefficients, dtype=np.float64)
    if e.shape[0] != len(a):
        raise SalesModelError("one eigenvector row per coefficient required")
    return e.T @ a


def group_impacts(model_or_impacts, totals: np.ndarray) -> np.ndarray:
    """Per-class contribution to the period index: totals * impacts."""
    if isinstance(model_or_impacts, FittedSalesModel):
        imp = model_or_impacts.per_viewer_impacts
    else:
        imp = np.asarray(model_or_impacts, dtype=np.float64)
    t = np.asarray(totals, dtype=np.float64)
    if np.any(t < 0):
        raise SalesModelError("totals must be non-negative")
    return t * imp


def predict(model: FittedSalesModel, matrix: ExposureMatrix) -> SalesSeries:
    """Predicted index per day, unclamped (negative means below last year)."""
    scores = project(model.pca, matrix.counts, model.k)
    vals = model.intercept + scores @ model.coefficients
    return SalesSeries(matrix.days, vals)


# -- persistence -----------------------------------------------------------


def model_to_json(model: FittedSalesModel) -> str:
    d = model.diagnostics
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "means": model.pca.means.tolist(),
        "eigenvalues": model.pca.eigenvalues.tolist(),
        "eigenvectors": model.pca.eigenvectors.tolist(),
        "contribution": model.pca.contribution.tolist(),
        "k": model.k,
        "coefficients": model.coefficients.tolist(),
        "intercept": model.intercept,
        "per_viewer_impacts": model.per_viewer_impacts.tolist(),
        "train_days": [x.isoformat() for x in model.train_days],
        "diagnostics": {
            "coefficients": d.coefficients.tolist(),
            "intercept": d.intercept,
            "stderrs": d.stderrs.tolist(),
            "t_values": d.t_values.tolist(),
            "p_values": d.p_values.tolist(),
            "r_squared": d.r_squared,
            "f_value": d.f_value,
            "dof": d.dof,
            "sst_zero": d.sst_zero,
        },
    }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> FittedSalesModel:
    doc = json.loads(text)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise SalesModelError(f"unsupported model format {doc.get('format_version')!r}")
    dg = doc["diagnostics"]
    diag = OlsResult(
        coefficients=np.array(dg["coefficients"]),
        intercept=dg["intercept"],
        stderrs=np.array(dg["stderrs"]),
        t_values=np.array(dg["t_values"]),
        p_values=np.array(dg["p_values"]),
        r_squared=dg["r_squared"],
        f_value=dg["f_value"],
        dof=dg["dof"],
        sst_zero=dg["sst_zero"],
    )
    p = PcaResult(
        means=np.array(doc["means"]),
        eigenvalues=np.array(doc["eigenvalues"]),
        eigenvectors=np.array(doc["eigenvectors"]),
        contribution=np.array(doc["contribution"]),
    )
    return FittedSalesModel(
        pca=p,
        k=doc["k"],
        coefficients=np.array(doc["coefficients"]),
        intercept=doc["intercept"],
        diagnostics=diag,
        train_days=tuple(date.fromisoformat(x) for x in doc["train_days"]),
    )


def save_model(model: FittedSalesModel, path: str | os.PathLike) -> None:
    _atomic_write(path, model_to_json(model) + "\n")


def load_model(path: str | os.PathLike) -> FittedSalesModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())
