"""Replication experiments: distributions of estimate/truth ratios.

Replication ``r`` of a plan samples from the stream ``(base_seed, r)``, so
a summary depends only on the plan, never on how replications are scheduled
across workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError, TailContagionError
from .estimators import (
    EXPONENT_OUT_OF_RANGE,
    INDEX_METHODS,
    METHODS,
    _anchor,
    evt_from_anchor,
    fit_indices_ai,
    fit_indices_dependent,
)
from .models import ModelSpec, model_from_params
from .oracles import MEASURES, TRUTH_SOURCES, reference_value

QUANTILES = {"min": 0.0, "q05": 0.05, "q25": 0.25, "median": 0.5, "q75": 0.75, "q95": 0.95, "max": 1.0}
SUMMARY_CSV_HEADER = ["method", "measure", "p", "q05", "q25", "median", "q75", "q95", "failures"]


@dataclass(frozen=True)
class ExperimentPlan:
    spec: ModelSpec
    n: int = 1000
    k: int = 100
    k0: int | None = None
    k2: int | None = None
    k1: int | None = None
    p_list: tuple = (1 / 500, 1 / 1000, 1 / 5000, 1 / 10000)
    reps: int = 500
    base_seed: int = 0
    methods: tuple = ("empirical", "evt_ai")
    measures: tuple = ("MME",)
    name: str = ""
    truth_source: str | None = None
    mc_budget: int = 10**7
    index_method: str = "hill"

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "p_list", tuple(float(p) for p in self.p_list))
        set_(self, "methods", tuple(self.methods))
        set_(self, "measures", tuple(m.upper() for m in self.measures))
        for key in ("k0", "k2", "k1"):
            if getattr(self, key) is None:
                set_(self, key, self.k)
        if not self.name:
            set_(self, "name", self.spec.key)
        if self.reps < 1:
            raise ParameterError("reps must be at least 1")
        if self.n < 2:
            raise ParameterError("n must be at least 2")
        for key in ("k", "k0", "k1", "k2"):
            v = getattr(self, key)
            if not (1 <= v < self.n):
                raise ParameterError(f"{key} must satisfy 1 <= {key} < n, got {v}")
        if not self.p_list or any(not (0.0 < p < 1.0) for p in self.p_list):
            raise ParameterError("every level in p_list must lie in (0, 1)")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ParameterError(f"methods must be a nonempty subset of {METHODS}")
        if not self.measures or any(m not in MEASURES for m in self.measures):
            raise ParameterError(f"measures must be a nonempty subset of {MEASURES}")
        if self.index_method not in INDEX_METHODS:
            raise ParameterError(f"index_method must be one of {sorted(INDEX_METHODS)}")
        if self.truth_source is not None and self.truth_source not in TRUTH_SOURCES:
            raise ParameterError(f"truth_source must be one of {TRUTH_SOURCES}")

    def empirical_k(self, p: float) -> int | None:
        """``n p`` when it is a positive integer below ``n``, else ``None``.

        Levels without such a ``k`` (in particular ``p < 1/n``) get no
        empirical cell.
        """
        kp = self.n * p
        r = round(kp)
        return r if r >= 1 and math.isclose(kp, r, rel_tol=1e-9) and r < self.n else None

    def to_dict(self):
        return {
            "name": self.name, "model": self.spec.to_dict(), "n": self.n, "k": self.k,
            "k0": self.k0, "k1": self.k1, "k2": self.k2, "p_list": list(self.p_list),
            "reps": self.reps, "base_seed": self.base_seed, "methods": list(self.methods),
            "measures": list(self.measures), "truth_source": self.truth_source,
            "mc_budget": self.mc_budget, "index_method": self.index_method,
        }


@dataclass
class RatioCell:
    method: str
    measure: str
    p: float
    truth: float
    truth_source: str
    quantiles: dict
    successes: int
    failures: int
    flagged: int = 0

    def iqr_contains(self, x: float = 1.0) -> bool:
        return self.quantiles["q25"] <= x <= self.quantiles["q75"]


@dataclass
class RatioExperimentSummary:
    plan: ExperimentPlan
    cells: list = field(default_factory=list)

    @property
    def truth_source(self) -> str:
        return ",".join(sorted({c.truth_source for c in self.cells}))

    def cell(self, method: str, measure: str, p: float) -> RatioCell:
        for c in self.cells:
            if c.method == method and c.measure == measure.upper() and math.isclose(c.p, p, rel_tol=1e-12):
                return c
        raise KeyError((method, measure, p))

    def to_dict(self):
        return {
            "plan": self.plan.to_dict(),
            "truth_source": self.truth_source,
            "cells": [
                {"method": c.method, "measure": c.measure, "p": c.p, "truth": c.truth,
                 "truth_source": c.truth_source, **c.quantiles, "successes": c.successes,
                 "failures": c.failures, "flagged": c.flagged}
                for c in self.cells
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_CSV_HEADER)
        for c in self.cells:
            q = c.quantiles
            w.writerow([c.method, c.measure, repr(c.p), *(repr(q[key]) for key in SUMMARY_CSV_HEADER[3:8]),
                        c.failures])
        return buf.getvalue()


def _targets(plan):
    """``(method, measure, p)`` cells in output order."""
    out = []
    for method in plan.methods:
        for measure in plan.measures:
            for p in plan.p_list:
                if method == "empirical" and plan.empirical_k(p) is None:
                    continue
                out.append((method, measure, p))
    return out


def _replicate(plan: ExperimentPlan, r: int, targets):
    """Estimates for one replication: ``{cell: (value or None, flagged)}``."""
    s = plan.spec.sample(plan.n, plan.base_seed, stream=r)
    res = {}
    fitted = {}
    anchors = {}

    def anchor(measure, k):
        key = (measure, k)
        if key not in anchors:
            anchors[key] = _anchor(s, k, measure)
        return anchors[key]

    for method, measure, p in targets:
        try:
            if method == "empirical":
                res[(method, measure, p)] = (anchor(measure, plan.empirical_k(p)), False)
                continue
            if method not in fitted:
                fitted[method] = (fit_indices_ai(s, plan.k0, plan.k2, plan.index_method)
                                  if method == "evt_ai"
                                  else fit_indices_dependent(s, plan.k1, plan.index_method))
            est = evt_from_anchor(anchor(measure, plan.k), measure, plan.n, plan.k, p, fitted[method])
            res[(method, measure, p)] = (est.value, EXPONENT_OUT_OF_RANGE in est.flags)
        except TailContagionError:
            res[(method, measure, p)] = (None, False)
    return res


def _replicate_chunk(args):
    plan, rs, targets = args
    return [_replicate(plan, r, targets) for r in rs]


def run_experiment(plan: ExperimentPlan, workers: int = 1) -> RatioExperimentSummary:
    """Estimate/truth ratio quantiles for every requested method, measure and level.

    Errored replications are excluded from the quantiles and counted as
    failures; estimates with an out-of-range extrapolation exponent stay in
    and are counted under ``flagged``.
    """
    targets = _targets(plan)
    truths = {}
    for _, measure, p in targets:
        if (measure, p) not in truths:
            truths[(measure, p)] = reference_value(plan.spec, measure, p, plan.truth_source,
                                                   budget=plan.mc_budget, seed=plan.base_seed)
    reps = list(range(plan.reps))
    if workers > 1 and plan.reps > 1:
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_replicate_chunk, [(plan, c, targets) for c in chunks]))
        by_r = {}
        for c, part in zip(chunks, parts):
            by_r.update(zip(c, part))
        results = [by_r[r] for r in reps]
    else:
        results = [_replicate(plan, r, targets) for r in reps]

    summary = RatioExperimentSummary(plan)
    for cell in targets:
        method, measure, p = cell
        truth, source = truths[(measure, p)]
        vals = [res[cell][0] for res in results]
        ok = np.array([v for v in vals if v is not None and math.isfinite(v)], dtype=float)
        flagged = sum(1 for res in results if res[cell][0] is not None and res[cell][1])
        ratios = ok / truth
        if ratios.size:
            quants = {key: float(np.quantile(ratios, q)) for key, q in QUANTILES.items()}
        else:
            quants = {key: math.nan for key in QUANTILES}
        summary.cells.append(RatioCell(method, measure, p, truth, source, quants, int(ratios.size),
                                       plan.reps - int(ratios.size), flagged))
    return summary


STUDY_LEVELS = (1 / 500, 1 / 1000, 1 / 5000, 1 / 10000)


def canned_plans(reps: int = 500, base_seed: int = 2024) -> list[ExperimentPlan]:
    """The seven boxplot studies: Gaussian (a)-(d), Marshall-Olkin (a)-(b), Model C.

    Model C estimates its indices with the L-moment fit; the Hill plots of
    its sums are too unstable at these sample sizes.
    """
    from .models import AdditiveModelC, GaussianCopulaPareto, MarshallOlkinPareto

    common = dict(n=1000, k=100, p_list=STUDY_LEVELS, reps=reps, base_seed=base_seed,
                  methods=("empirical", "evt_ai"))
    specs = [
        ("gauss_a", GaussianCopulaPareto(2.0, 0.9), ("MME",)),
        ("gauss_b", GaussianCopulaPareto(2.0, 0.5), ("MME",)),
        ("gauss_c", GaussianCopulaPareto(2.3, 0.8), ("MME",)),
        ("gauss_d", GaussianCopulaPareto(1.9, 0.8), ("MME",)),
        ("mo_a", MarshallOlkinPareto(2.0, 0.8, 0.7), ("MME",)),
        ("mo_b", MarshallOlkinPareto(2.5, 0.8, 0.8), ("MME",)),
        ("modelc", AdditiveModelC(1.5, 2.0), ("MME", "MES")),
    ]
    return [ExperimentPlan(spec=s, measures=m, name=name,
                           index_method="lmoment" if name == "modelc" else "hill", **common)
            for name, s, m in specs]


def reproduce_figures(out_dir=None, reps: int = 500, base_seed: int = 2024,
                            workers: int = 1, prov: dict | None = None) -> list[RatioExperimentSummary]:
    """Run the seven canned plans; with ``out_dir``, write ``<name>.csv`` and ``<name>.json`` each."""
    summaries = [run_experiment(plan, workers=workers) for plan in canned_plans(reps, base_seed)]
    if out_dir is not None:
        for s in summaries:
            write_summary(s, out_dir, prov=prov)
    return summaries


def write_summary(summary: RatioExperimentSummary, out_dir, stem: str | None = None,
                  prov: dict | None = None):
    """Write ``<stem>.csv`` and ``<stem>.json``; ``prov`` adds a provenance header/key."""
    from pathlib import Path

    from .io import to_json, with_header

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or summary.plan.name
    csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
    csv_path.write_text(with_header(summary.to_csv(), prov))
    json_path.write_text(to_json(summary.to_dict(), prov) + "\n")
    return csv_path, json_path


# -- plan files -------------------------------------------------------------

_INT_KEYS = {"n", "k", "k0", "k1", "k2", "reps", "base_seed", "mc_budget"}
_LIST_KEYS = {"methods", "measures"}
_PLAN_KEYS = _INT_KEYS | _LIST_KEYS | {"family", "p_list", "name", "truth_source", "index_method"}


def _parse_level(text: str) -> float:
    # accepts 0.002, 2e-3 or 1/500
    return float(Fraction(text.strip())) if "/" in text else float(text)


def plan_from_mapping(mapping: dict) -> ExperimentPlan:
    """Build a plan from flat keys; model parameters sit beside ``family``."""
    data = dict(mapping)
    if "family" not in data:
        raise ParameterError("plan needs a 'family' entry")
    family = str(data.pop("family"))
    model_params = {k: data.pop(k) for k in list(data) if k not in _PLAN_KEYS}
    for key, val in model_params.items():
        if isinstance(val, str):
            try:
                model_params[key] = float(val)
            except ValueError:
                pass
    spec = model_from_params(family, **model_params)
    kwargs = {}
    for key, val in data.items():
        if key in _INT_KEYS:
            kwargs[key] = int(val)
        elif key in _LIST_KEYS:
            kwargs[key] = tuple(v.strip() for v in val.split(",")) if isinstance(val, str) else tuple(val)
        elif key == "p_list":
            kwargs[key] = tuple(_parse_level(v) for v in val.split(",")) if isinstance(val, str) \
                else tuple(float(v) for v in val)
        else:
            kwargs[key] = val
    return ExperimentPlan(spec=spec, **kwargs)


def parse_plan(text: str) -> ExperimentPlan:
    """Parse a plan from JSON or from ``key = value`` lines (``#`` starts a comment)."""
    stripped = text.strip()
    if stripped.startswith("{"):
        return plan_from_mapping(json.loads(stripped))
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"plan line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        mapping[key] = val
    return plan_from_mapping(mapping)
