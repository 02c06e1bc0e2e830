"""Decay criteria for tuples of elementary operators built from shifts.

The checkers evaluate families of projected norm quantities along a strictly
increasing iterate sequence n_k and classify each family:

* ``decays-below(tol, at k)``: some k exists from which every later value
  stays strictly below tol through k_max;
* ``inconclusive``: no such k, but the fitted log-slope is negative (the
  family looks like it decays, just not yet below tol);
* ``fails``: no such k and no negative trend.

A least-squares slope of log(value) against n_k is attached to every report
so borderline cases can be judged by a human rather than by the verdict enum
alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .elementary import ElementaryOp, apply_power
from .errors import OpdynError
from .finmat import (
    DEFAULT_WINDOW_CAP,
    FiniteMatrix,
    op_norm,
    projection_matrix,
    shift_multiply,
    truncate_left,
)
from .lattice import (
    DEFAULT_HORIZON,
    PermutationUnitary,
    WeightedShift,
    monomial_product_norm,
)

DEFAULT_TOL = 1e-6
DEFAULT_K_MAX = 50

#: Absolute slack allowed when measured norms are compared with their
#: monomial upper bounds.
BOUND_SLACK = 1e-8


@dataclass(frozen=True)
class NSeq:
    """Strictly increasing iterate sequence rule n_k, k = 1, 2, ...

    ``all-k`` is n_k = k; ``arithmetic`` is n_k = a + (k-1) b; ``explicit``
    stores the values outright.
    """

    kind: str
    a: int = 1
    b: int = 1
    values: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "all-k":
            return
        if self.kind == "arithmetic":
            if self.a < 1 or self.b < 1:
                raise ValueError("arithmetic rule needs a >= 1 and b >= 1")
            return
        if self.kind == "explicit":
            vals = self.values
            if not vals or any(v < 1 for v in vals):
                raise ValueError("explicit sequence must list positive integers")
            if any(y <= x for x, y in zip(vals, vals[1:])):
                raise ValueError("explicit sequence must be strictly increasing")
            return
        raise ValueError(f"unknown n_seq kind {self.kind!r}")

    @staticmethod
    def all_k() -> "NSeq":
        return NSeq(kind="all-k")

    @staticmethod
    def arithmetic(a: int, b: int) -> "NSeq":
        return NSeq(kind="arithmetic", a=int(a), b=int(b))

    @staticmethod
    def explicit(values) -> "NSeq":
        return NSeq(kind="explicit", values=tuple(int(v) for v in values))

    def value(self, k: int) -> int:
        if k < 1:
            raise ValueError("k is 1-based")
        if self.kind == "all-k":
            return k
        if self.kind == "arithmetic":
            return self.a + (k - 1) * self.b
        if k > len(self.values):
            raise ValueError(f"explicit sequence has no k={k}")
        return self.values[k - 1]


@dataclass(frozen=True)
class CriterionInstance:
    """One concrete decay-check configuration.

    ``shifts`` and ``r_list`` pair up: operator l acts with exponent
    r_l * n_k.  ``m`` selects the window projection P_m.  A single shift is
    allowed so that closed-form one-operator scenarios can reuse the same
    plumbing; the cross-term families are simply empty in that case.
    """

    shifts: tuple[WeightedShift, ...]
    unitary: PermutationUnitary
    r_list: tuple[int, ...]
    n_seq: NSeq | None
    m: int
    k_max: int = DEFAULT_K_MAX
    horizon: int = DEFAULT_HORIZON
    window_cap: int = DEFAULT_WINDOW_CAP
    orientation: str = "WFU"

    def __post_init__(self):
        if not self.shifts:
            raise ValueError("need at least one shift")
        if len(self.r_list) != len(self.shifts):
            raise ValueError("r_list must pair with shifts")
        if any(r < 1 for r in self.r_list):
            raise ValueError("exponent multipliers must be positive")
        if any(y <= x for x, y in zip(self.r_list, self.r_list[1:])):
            raise ValueError("r_list not strictly increasing")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")

    @property
    def n_ops(self) -> int:
        return len(self.shifts)

    def n_values(self) -> tuple[int, ...]:
        if self.n_seq is None:
            raise ValueError("instance has no iterate sequence")
        return tuple(self.n_seq.value(k) for k in range(1, self.k_max + 1))

    def elementary_ops(self) -> tuple[ElementaryOp, ...]:
        return tuple(
            ElementaryOp(self.unitary, w, self.orientation) for w in self.shifts
        )


@dataclass(frozen=True)
class Verdict:
    kind: str  # "decays-below" | "fails" | "inconclusive"
    tol: float
    attained_k: int | None = None

    def render(self) -> str:
        if self.kind == "decays-below":
            return f"decays-below({self.tol!r} at k={self.attained_k})"
        return self.kind


@dataclass(frozen=True)
class DecayReport:
    """Values of one quantity along k, with verdict and fitted log-slope."""

    quantity: str
    values: tuple[tuple[int, float], ...]
    n_values: tuple[int, ...]
    verdict: Verdict
    fitted_rate: float | None
    bounds: tuple[tuple[int, float], ...] | None = None


def _fit_rate(ns: Sequence[int], vals: Sequence[float]) -> float | None:
    pts = [(float(n), math.log(v)) for n, v in zip(ns, vals) if v > 0.0]
    if len(pts) < 2:
        return None
    xbar = math.fsum(x for x, _ in pts) / len(pts)
    ybar = math.fsum(y for _, y in pts) / len(pts)
    sxx = math.fsum((x - xbar) ** 2 for x, _ in pts)
    if sxx == 0.0:
        return None
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in pts)
    return sxy / sxx


def _verdict_for(vals: Sequence[float], tol: float, rate: float | None) -> Verdict:
    last_at_or_above = 0
    for idx, v in enumerate(vals, start=1):
        if v >= tol:
            last_at_or_above = idx
    if last_at_or_above < len(vals):
        return Verdict("decays-below", tol, attained_k=last_at_or_above + 1)
    if rate is not None and rate < 0.0:
        return Verdict("inconclusive", tol)
    return Verdict("fails", tol)


def make_report(
    quantity: str,
    ns: Sequence[int],
    vals: Sequence[float],
    tol: float,
    bounds: Sequence[float] | None = None,
) -> DecayReport:
    rate = _fit_rate(ns, vals)
    return DecayReport(
        quantity=quantity,
        values=tuple((k, v) for k, v in enumerate(vals, start=1)),
        n_values=tuple(ns),
        verdict=_verdict_for(vals, tol, rate),
        fitted_rate=rate,
        bounds=tuple((k, b) for k, b in enumerate(bounds, start=1))
        if bounds is not None
        else None,
    )


def all_decay(reports: Iterable[DecayReport]) -> bool:
    return all(r.verdict.kind == "decays-below" for r in reports)


def pos_label(l: int, r: int, m: int) -> str:
    return f"norm(W{l}^(+{r}n) P{m})"


def neg_label(l: int, r: int, m: int) -> str:
    return f"norm(W{l}^(-{r}n) P{m})"


def cross_label(l: int, rl: int, s: int, rs: int, m: int) -> str:
    return f"norm(W{l}^(+{rl}n) W{s}^(-{rs}n) P{m})"


def _sufficient_quantities(inst: CriterionInstance):
    # (label, factors) in a fixed construction order; reports get sorted by
    # label afterwards so merged output is deterministic.
    out = []
    for l, (w, r) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        out.append((pos_label(l, r, inst.m), ((w, r),)))
        out.append((neg_label(l, r, inst.m), ((w, -r),)))
    for l, (wl, rl) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        for s, (ws, rs) in enumerate(zip(inst.shifts, inst.r_list), start=1):
            if s == l:
                continue
            out.append(
                (cross_label(l, rl, s, rs, inst.m), ((wl, rl), (ws, -rs)))
            )
    return out


def sufficient_decay_logs(
    inst: CriterionInstance, n: int
) -> list[tuple[str, float]]:
    """Log-domain values of every sufficient-condition quantity at iterate n."""
    out = []
    for label, factors in _sufficient_quantities(inst):
        scaled = tuple((w, p * n) for w, p in factors)
        pn = monomial_product_norm(scaled, inst.m, horizon=inst.horizon)
        out.append((label, pn.log_value))
    return out


def check_sufficient_decay(
    inst: CriterionInstance, tol: float = DEFAULT_TOL
) -> list[DecayReport]:
    """Projected weight-product norms whose joint decay is the sufficient
    condition for dense joint approximation: ||W_l^{+r_l n_k} P_m||,
    ||W_l^{-r_l n_k} P_m|| and both ordered cross products."""
    ns = inst.n_values()
    reports = []
    for label, factors in _sufficient_quantities(inst):
        vals = []
        for n in ns:
            scaled = tuple((w, p * n) for w, p in factors)
            vals.append(
                monomial_product_norm(scaled, inst.m, horizon=inst.horizon).value
            )
        reports.append(make_report(label, ns, vals, tol))
    return sorted(reports, key=lambda r: r.quantity)


def check_witness_conditions(
    inst: CriterionInstance,
    d_seq: Sequence[FiniteMatrix],
    g_seqs: Sequence[Sequence[FiniteMatrix]],
    tol: float = DEFAULT_TOL,
) -> list[DecayReport]:
    """Decay conditions on explicit witness sequences D_k, G_k^{(l)}.

    Reports ||D_k - P_m||, ||G_k^{(l)} - P_m||, ||W_l^{+r_l n_k} D_k||,
    ||W_l^{-r_l n_k} G_k^{(l)}|| and the ordered cross family
    ||W_l^{+r_l n_k} W_s^{-r_s n_k} G_k^{(s)}||.  With every witness equal to
    P_m these reduce exactly to the sufficient-decay quantities.
    """
    ns = inst.n_values()
    if len(d_seq) != len(ns):
        raise ValueError("d_seq must have k_max members")
    if len(g_seqs) != inst.n_ops or any(len(g) != len(ns) for g in g_seqs):
        raise ValueError("g_seqs must be n_ops sequences of k_max members")
    pm = projection_matrix(inst.m)
    reports = []

    vals = [op_norm(d - pm) for d in d_seq]
    reports.append(make_report(f"norm(D_k - P{inst.m})", ns, vals, tol))

    for l, (w, r) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        g_seq = g_seqs[l - 1]
        vals = [op_norm(g - pm) for g in g_seq]
        reports.append(make_report(f"norm(G{l}_k - P{inst.m})", ns, vals, tol))

        vals = [
            op_norm(
                shift_multiply(
                    d, w, r * n, "left",
                    horizon=inst.horizon, window_cap=inst.window_cap,
                )
            )
            for n, d in zip(ns, d_seq)
        ]
        reports.append(make_report(f"norm(W{l}^(+{r}n) D_k)", ns, vals, tol))

        vals = [
            op_norm(
                shift_multiply(
                    g, w, -r * n, "left",
                    horizon=inst.horizon, window_cap=inst.window_cap,
                )
            )
            for n, g in zip(ns, g_seq)
        ]
        reports.append(make_report(f"norm(W{l}^(-{r}n) G{l}_k)", ns, vals, tol))

    for l, (wl, rl) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        for s, (ws, rs) in enumerate(zip(inst.shifts, inst.r_list), start=1):
            if s == l:
                continue
            vals = []
            for n, g in zip(ns, g_seqs[s - 1]):
                inner = shift_multiply(
                    g, ws, -rs * n, "left",
                    horizon=inst.horizon, window_cap=inst.window_cap,
                )
                outer = shift_multiply(
                    inner, wl, rl * n, "left",
                    horizon=inst.horizon, window_cap=inst.window_cap,
                )
                vals.append(op_norm(outer))
            reports.append(
                make_report(
                    f"norm(W{l}^(+{rl}n) W{s}^(-{rs}n) G{s}_k)", ns, vals, tol
                )
            )
    return sorted(reports, key=lambda r: r.quantity)


def check_pointwise_decay(
    inst: CriterionInstance,
    seeds: Sequence[FiniteMatrix],
    tol: float = DEFAULT_TOL,
) -> list[DecayReport]:
    """Orbit decay of the operators themselves on left-truncated seeds.

    For each seed F the families ||T_l^{+r_l n_k}(P_m F)||,
    ||T_s^{-r_s n_k}(P_m F)|| and ||T_l^{+r_l n_k} T_s^{-r_s n_k}(P_m F)||
    are measured and checked against the corresponding projected
    weight-product bound times ||F||; a violation raises, since it would mean
    the transport and the closed-form norms disagree.
    """
    ns = inst.n_values()
    ops = inst.elementary_ops()
    reports = []
    for idx, f in enumerate(seeds):
        f_cut = truncate_left(f, inst.m)
        f_norm = op_norm(f)

        def add(label: str, powers, factors):
            vals, bounds = [], []
            for n in ns:
                mat = f_cut
                for op, p in powers:
                    mat = apply_power(
                        op, p * n, mat,
                        horizon=inst.horizon, window_cap=inst.window_cap,
                    )
                value = op_norm(mat)
                scaled = tuple((w, p * n) for w, p in factors)
                bound = (
                    monomial_product_norm(
                        scaled, inst.m, horizon=inst.horizon
                    ).value
                    * f_norm
                )
                if value > bound + BOUND_SLACK:
                    raise OpdynError(
                        f"{label}: measured {value} exceeds bound {bound}"
                    )
                vals.append(value)
                bounds.append(bound)
            reports.append(make_report(label, ns, vals, tol, bounds=bounds))

        for l, ((op, w), r) in enumerate(
            zip(zip(ops, inst.shifts), inst.r_list), start=1
        ):
            add(
                f"norm(T{l}^(+{r}n) P{inst.m} F{idx})",
                ((op, r),),
                ((w, r),),
            )
            add(
                f"norm(T{l}^(-{r}n) P{inst.m} F{idx})",
                ((op, -r),),
                ((w, -r),),
            )
        for l, (wl, rl) in enumerate(zip(inst.shifts, inst.r_list), start=1):
            for s, (ws, rs) in enumerate(zip(inst.shifts, inst.r_list), start=1):
                if s == l:
                    continue
                # rightmost acts first: T_s^{-} then T_l^{+}
                add(
                    f"norm(T{l}^(+{rl}n) T{s}^(-{rs}n) P{inst.m} F{idx})",
                    ((ops[s - 1], -rs), (ops[l - 1], rl)),
                    ((wl, rl), (ws, -rs)),
                )
    return sorted(reports, key=lambda r: r.quantity)


def search_subsequence(
    inst: CriterionInstance,
    candidate_pool: Sequence[int],
    target_count: int,
    tol: float = DEFAULT_TOL,
) -> tuple[int, ...] | None:
    """Greedy pick of iterates whose sufficient-decay quantities beat a
    halving schedule tol * 2^{-k}; None when the pool is exhausted first.

    Comparison happens in the log domain so underflowing quantities still
    qualify.
    """
    if target_count < 1:
        raise ValueError("target_count must be positive")
    chosen: list[int] = []
    log_tol = math.log(tol)
    log2 = math.log(2.0)
    for n in sorted(set(int(v) for v in candidate_pool)):
        if n < 1:
            continue
        k = len(chosen) + 1
        threshold = log_tol - k * log2
        logs = sufficient_decay_logs(inst, n)
        if all(lg < threshold for _, lg in logs):
            chosen.append(n)
            if len(chosen) == target_count:
                return tuple(chosen)
    return None


def render_verdict(report: DecayReport) -> str:
    return report.verdict.render()


def write_reports_csv(reports: Sequence[DecayReport], fh) -> None:
    """CSV 'quantity,k,n_k,value,bound,verdict'; 17 significant digits,
    lowercase scientific, no locale dependence."""
    fh.write("quantity,k,n_k,value,bound,verdict\n")
    for rep in reports:
        verdict = rep.verdict.render()
        bound_map = dict(rep.bounds) if rep.bounds is not None else {}
        for (k, v), n in zip(rep.values, rep.n_values):
            bound = f"{bound_map[k]:.16e}" if k in bound_map else ""
            fh.write(f"{rep.quantity},{k},{n},{v:.16e},{bound},{verdict}\n")


def render_summary(reports: Sequence[DecayReport]) -> str:
    lines = []
    for rep in reports:
        rate = "n/a" if rep.fitted_rate is None else f"{rep.fitted_rate:.6e}"
        lines.append(f"{rep.quantity}: {rep.verdict.render()}; fitted_rate={rate}")
    ok = "yes" if all_decay(reports) else "no"
    lines.append(f"all-decays: {ok}")
    return "\n".join(lines) + "\n"
