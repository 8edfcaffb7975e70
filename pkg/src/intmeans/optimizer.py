"""Descent over the weight exponent beta, certificates and spectrum tables."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from .coeffs import BOUNDARY_TOL, one_term_margin
from .criteria import (DEFAULT_GRID, EmptinessEvidence, GridSpec, family_empty,
                       replay_evidence)
from .specfun import DEFAULT_CONTROL, SeriesControl

FORMAT_VERSION = 1
CRITERIA = ("one-term", "two-term-I", "two-term-J", "three-term-E")
_FAMILY_MODE = {"two-term-I": "I", "two-term-J": "J", "three-term-E": "E"}


@dataclass(frozen=True)
class DescentConfig:
    """Settings of one descent run.

    Args:
        theta0: left end of the theta range; also the hypothesis slack.
        grid: theta sampling for family criteria and the one-term scan.
        criteria_order: criteria tried at each trial beta, first success wins.
        step: trial decrement of beta; defaults to theta0 and may not exceed it.
        bisect_tol: absolute width at which the final bisection stops.
        bisect_rel: relative width (to the current bound) at which it stops.
        epsilon_start: slack added to the trivial starting bound.
        ctl: series truncation policy.
    """

    theta0: float = 0.01
    grid: GridSpec = DEFAULT_GRID
    criteria_order: tuple = ("two-term-I", "one-term")
    step: Optional[float] = None
    bisect_tol: float = 5e-4
    bisect_rel: float = 1e-2
    epsilon_start: float = 1e-3
    ctl: SeriesControl = DEFAULT_CONTROL

    def __post_init__(self):
        if not 0 < self.theta0 <= 1:
            raise ValueError("theta0 must lie in (0, 1]")
        if self.step is None:
            object.__setattr__(self, "step", self.theta0)
        if not 0 < self.step <= self.theta0:
            raise ValueError("step must be positive and at most theta0")
        order = tuple(self.criteria_order)
        unknown = set(order) - set(CRITERIA)
        if unknown or not order:
            raise ValueError(f"unknown criteria {sorted(unknown)}")
        object.__setattr__(self, "criteria_order", order)
        if not (self.bisect_tol > 0 and self.bisect_rel > 0 and self.epsilon_start > 0):
            raise ValueError("tolerances must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["criteria_order"] = list(self.criteria_order)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DescentConfig":
        d = dict(d)
        d["grid"] = GridSpec(**d["grid"])
        d["ctl"] = SeriesControl(**d["ctl"])
        d["criteria_order"] = tuple(d["criteria_order"])
        return cls(**d)

    def j_first(self) -> "DescentConfig":
        rest = tuple(c for c in self.criteria_order if c != "two-term-J")
        return replace(self, criteria_order=("two-term-J",) + rest)


@dataclass(frozen=True)
class Step:
    beta_from: float
    beta_to: float
    criterion: str
    theta_hypothesis: float
    margin: float
    evidence: dict


@dataclass
class BoundCertificate:
    """Audited chain of descent steps for one tau."""

    tau: complex
    beta_start: float
    beta_final: float
    steps: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def criteria_used(self) -> set:
        return {s.criterion for s in self.steps}

    @property
    def tag(self) -> str:
        """Criterion of the last step, with '*' if the J intervals were used."""
        if not self.steps:
            return "trivial"
        last = self.steps[-1].criterion
        return last + ("*" if "two-term-J" in self.criteria_used else "")

    def chain_ok(self) -> bool:
        beta = self.beta_start
        for s in self.steps:
            if not (s.beta_from == beta and s.beta_to < s.beta_from):
                return False
            if s.beta_to + s.theta_hypothesis < s.beta_from:
                return False
            beta = s.beta_to
        return beta == self.beta_final

    def to_dict(self) -> dict:
        tau = complex(self.tau)
        return {
            "format_version": self.format_version,
            "tau": [tau.real, tau.imag],
            "beta_start": self.beta_start,
            "beta_final": self.beta_final,
            "config": self.config,
            "steps": [asdict(s) for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, default=_jsonable)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundCertificate":
        return cls(tau=complex(*d["tau"]), beta_start=d["beta_start"],
                   beta_final=d["beta_final"],
                   steps=[Step(**s) for s in d["steps"]], config=d["config"],
                   format_version=d["format_version"])


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serialisable: {type(x)}")


def trivial_start(tau, epsilon: float = 1e-3) -> float:
    """2|tau| + Re tau + epsilon, the a priori certified bound."""
    tau = complex(tau)
    if tau == 0:
        raise ValueError("tau must be nonzero")
    return 2 * abs(tau) + tau.real + epsilon


def _evidence_dict(ev: EmptinessEvidence) -> dict:
    witness = {k: (list(v) if isinstance(v, tuple) else v) for k, v in ev.witness.items()}
    return {"verdict": ev.verdict, "mode": ev.mode, "witness": witness, "margin": ev.margin}


def _evidence_from(d: dict) -> EmptinessEvidence:
    witness = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d["witness"].items()}
    return EmptinessEvidence(d["verdict"], d["mode"], witness, d["margin"])


def _one_term(tau, beta, beta_from, cfg: DescentConfig):
    """Best one-term theta compatible with the hypothesis chain."""
    lo = max(cfg.theta0, beta_from - beta)
    if lo >= 1:
        return None
    thetas = np.linspace(lo, 1.0, cfg.grid.n)[:-1]
    margins = np.asarray(one_term_margin(tau, beta, thetas, cfg.ctl))
    k = int(np.argmax(margins))
    m = float(margins[k])
    if m > 0 or abs(m) <= BOUNDARY_TOL:
        th = float(thetas[k])
        return Step(beta_from, beta, "one-term", th, m,
                    {"theta": th, "margin": m, "boundary": abs(m) <= BOUNDARY_TOL})
    return None


def _family_mode(criterion: str, tau) -> str:
    mode = _FAMILY_MODE[criterion]
    if complex(tau).imag != 0:
        if mode == "J":
            return ""
        if mode == "I":
            return "D"
    return mode


def try_criteria(tau, beta: float, beta_from: float, cfg: DescentConfig) -> Optional[Step]:
    """First criterion in cfg order certifying beta from the bound beta_from."""
    if beta <= 0:
        return None
    for crit in cfg.criteria_order:
        if crit == "one-term":
            step = _one_term(tau, beta, beta_from, cfg)
            if step is not None:
                return step
            continue
        if beta + cfg.theta0 < beta_from:
            continue
        mode = _family_mode(crit, tau)
        if not mode:
            continue
        ev = family_empty(tau, beta, cfg.theta0, mode, cfg.grid, cfg.ctl)
        if ev.empty:
            return Step(beta_from, beta, crit, float(cfg.theta0), float(ev.margin),
                        _evidence_dict(ev))
    return None


def descend(tau, cfg: DescentConfig = DescentConfig()) -> BoundCertificate:
    """Step beta down from the trivial bound while some criterion certifies it."""
    tau = complex(tau)
    start = trivial_start(tau, cfg.epsilon_start)
    cert = BoundCertificate(tau, start, start, [], cfg.to_dict())
    beta = start
    while True:
        trial = beta - cfg.step
        step = try_criteria(tau, trial, beta, cfg) if trial > 0 else None
        if step is None:
            break
        cert.steps.append(step)
        beta = trial
    lo, hi = max(beta - cfg.step, 0.0), beta
    while hi - lo > min(cfg.bisect_tol, cfg.bisect_rel * hi):
        mid = 0.5 * (lo + hi)
        step = try_criteria(tau, mid, hi, cfg)
        if step is None:
            lo = mid
        else:
            cert.steps.append(step)
            hi = mid
    cert.beta_final = hi
    return cert


def replay(cert: BoundCertificate) -> bool:
    """Re-validate every step of a certificate from its recorded witnesses."""
    if not cert.chain_ok():
        return False
    cfg = DescentConfig.from_dict(cert.config)
    for s in cert.steps:
        if s.criterion == "one-term":
            th = s.evidence["theta"]
            m = float(one_term_margin(cert.tau, s.beta_to, th, cfg.ctl))
            if not (m > 0 or abs(m) <= BOUNDARY_TOL) or th < s.beta_from - s.beta_to:
                return False
        else:
            ev = _evidence_from(s.evidence)
            if "one_term" in ev.witness and ev.witness["one_term"] < cfg.theta0:
                return False
            if not replay_evidence(ev, cert.tau, s.beta_to, cfg.ctl):
                return False
    return True


# ------------------------------------------------------------------ tables

@dataclass(frozen=True)
class TableRow:
    t: float
    beta: float
    criterion: str
    theta0: float
    grid_n: int
    steps: int
    runtime_ms: float
    flag: str = ""

    @property
    def support(self) -> float:
        return max(-self.t - 1, 3 * self.t - 1, 0.0)


@dataclass
class SpectrumTable:
    rows: list
    certificates: dict = field(default_factory=dict)

    def value(self, t: float) -> float:
        for r in self.rows:
            if r.t == t:
                return r.beta
        raise KeyError(t)


def _bound_row(t, cfg: DescentConfig, j_variant: bool):
    t0 = time.perf_counter()
    flag = ""
    try:
        cert = descend(t, cfg)
        if j_variant and "two-term-J" not in cfg.criteria_order:
            alt = descend(t, cfg.j_first())
            if alt.beta_final < cert.beta_final:
                cert = alt
    except (ArithmeticError, ValueError) as exc:
        start = trivial_start(t, cfg.epsilon_start)
        cert = BoundCertificate(complex(t), start, start, [], cfg.to_dict())
        flag = f"failed: {exc}"
    ms = 1000 * (time.perf_counter() - t0)
    row = TableRow(float(t), cert.beta_final, cert.tag, cfg.theta0, cfg.grid.n,
                   len(cert.steps), ms, flag)
    return row, cert


def build_table(ts: Iterable[float], cfg: DescentConfig = DescentConfig(),
                jobs: int = 1, j_variant: bool = True) -> SpectrumTable:
    """One descent per t; with j_variant, also the J-first order, keeping the lower bound."""
    ts = sorted(float(t) for t in ts)
    if any(t == 0 for t in ts):
        raise ValueError("t = 0 is excluded (the spectrum vanishes there)")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bound_row, ts, [cfg] * len(ts), [j_variant] * len(ts)))
    else:
        results = [_bound_row(t, cfg, j_variant) for t in ts]
    rows = [r for r, _ in results]
    certs = {r.t: c for r, c in results}
    return SpectrumTable(rows, certs)


def sigma_class_bound_at(s: float, table: SpectrumTable) -> float:
    """Convexity chord bound for B_Sigma(s) through (t1, B_*(t1)) and (2, 1)."""
    if s > 2:
        raise ValueError("the chord bound needs s <= 2")
    if s == 2:
        return 1.0
    values = [(1 - (2 - s) / (2 - r.t)) * 1.0 + (2 - s) / (2 - r.t) * r.beta
              for r in table.rows if r.t < s]
    if not values:
        raise ValueError("no table point to the left of s")
    return min(values)


TABLE_COLUMNS = ("t", "beta", "criterion", "theta0", "grid_n", "steps", "runtime_ms")


def table_text(table: SpectrumTable, timing: bool = False) -> str:
    """Delimited table; runtime is blank unless timing is requested."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in table.rows:
        w.writerow([f"{r.t:.6g}", f"{r.beta:.6f}", r.criterion, f"{r.theta0:g}", r.grid_n,
                    r.steps, f"{r.runtime_ms:.0f}" if timing else ""])
    return buf.getvalue()


def plot_data_text(table: SpectrumTable) -> str:
    """Whitespace-separated series: the bound, then the two support lines."""
    ts = [r.t for r in table.rows]
    lines = ["# series: bound", "# t beta"]
    lines += [f"{r.t:.6g} {r.beta:.6f}" for r in table.rows]
    lo, hi = (min(ts), max(ts)) if ts else (-1.0, 1.0)
    for name, fn in (("-t-1", lambda t: -t - 1), ("3t-1", lambda t: 3 * t - 1)):
        lines += ["", "", f"# series: support {name}", "# t B"]
        lines += [f"{t:.6g} {fn(t):.6f}" for t in (lo, hi)]
    return "\n".join(lines) + "\n"


DEFAULT_TS = (-20, -10, -8, -6, -5, -4, -3, -2.5, -2.4, -2.3, -2.2, -2.1, -2, -1.9, -1.8,
              -1.752, -1.7, -1.6, -1.5, -1.4, -1.3, -1.2, -1.1, -1, -0.9, -0.8, -0.7, -0.6,
              -0.5, -0.4, -0.3, -0.2, -0.15, -0.1, -0.05,
              0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9,
              1, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2, 2.1, 2.2, 2.3, 2.4, 2.5,
              3, 4, 5, 6)
