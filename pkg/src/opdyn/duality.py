"""Functionals with finite trace representers and their transported images.

A functional here is phi_A(F) = trace(A F) for a finitely supported matrix A.
Composition with a fixed left factor D gives another such functional with
representer A D, and the transpose action of an elementary operator moves the
representer by two-sided transport: for T(F) = W F U the image of phi_A under
the transpose has representer U^p A W^p.  Weak-* convergence statements are
proxied by a finite probe set of unit-norm matrices, which is enough to
separate finite representers but is documented as evidence, not proof.

The ``star`` flag reinterprets every shift factor as its Hilbert adjoint, so
scenarios built on the adjoint shifts reuse the same plumbing without a
dedicated downward-step shift type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .constructor import WitnessBundle
from .criteria import CriterionInstance, DecayReport, make_report
from .elementary import ElementaryOp
from .finmat import (
    DEFAULT_WINDOW_CAP,
    FiniteMatrix,
    Projection,
    compose,
    op_norm,
    permute_multiply,
    projection_matrix,
    shift_multiply,
    trace_norm,
    truncate_right,
    unit,
)
from .lattice import DEFAULT_HORIZON, monomial_product_norm_rowcut


@dataclass(frozen=True)
class FunctionalRep:
    """phi(F) = trace(representer . F); linear in both arguments."""

    representer: FiniteMatrix


def eval_functional(phi: FunctionalRep, f: FiniteMatrix) -> float:
    """trace(A F) summed over the shared support of A and F."""
    terms = []
    for (p, q), v in phi.representer.items():
        w = f.entry(q, p)
        if w != 0.0:
            terms.append(v * w)
    return math.fsum(terms)


def m_d(phi: FunctionalRep, d: FiniteMatrix | Projection) -> FunctionalRep:
    """Composition with the fixed left factor D: F maps to phi(D F), whose
    representer is A D."""
    if isinstance(d, Projection):
        return FunctionalRep(truncate_right(phi.representer, d.m))
    return FunctionalRep(compose(phi.representer, d))


def m_d_shift_power(
    phi: FunctionalRep,
    shift,
    p: int,
    *,
    star: bool = False,
    horizon: int = DEFAULT_HORIZON,
    window_cap: int = DEFAULT_WINDOW_CAP,
) -> FunctionalRep:
    """Composition with D = W^p (or the adjoint power when star), applied by
    transport instead of materializing D."""
    return FunctionalRep(
        shift_multiply(
            phi.representer, shift, p, "right",
            star=star, horizon=horizon, window_cap=window_cap,
        )
    )


def dual_apply_power(
    op: ElementaryOp,
    p: int,
    phi: FunctionalRep,
    *,
    star: bool = False,
    horizon: int = DEFAULT_HORIZON,
    window_cap: int = DEFAULT_WINDOW_CAP,
) -> FunctionalRep:
    """Transpose action of op^p on the functional.

    For T(F) = W F U the representer moves to U^p A W^p; negative p gives the
    transposed inverse.  The mirrored orientation U F W moves it to W^p A U^p.
    """
    if p == 0:
        return phi
    a = phi.representer
    kwargs = dict(horizon=horizon, window_cap=window_cap)
    if op.orientation == "WFU":
        a = permute_multiply(a, op.unitary, p, "left", **kwargs)
        a = shift_multiply(a, op.shift, p, "right", star=star, **kwargs)
    else:
        a = shift_multiply(a, op.shift, p, "left", star=star, **kwargs)
        a = permute_multiply(a, op.unitary, p, "right", **kwargs)
    return FunctionalRep(a)


@dataclass(frozen=True)
class TestSet:
    """Fixed finite family of probe matrices with operator norm at most 1."""

    # not a unit-test container, despite what the name suggests to pytest
    __test__ = False

    probes: tuple[FiniteMatrix, ...]

    def __post_init__(self):
        if not self.probes:
            raise ValueError("probe set must be nonempty")
        for mat in self.probes:
            if op_norm(mat) > 1.0 + 1e-12:
                raise ValueError("probe operator norm exceeds 1")


def default_probes(m: int) -> TestSet:
    """P_0..P_m followed by every matrix unit on the window, in fixed order."""
    probes = [projection_matrix(j) for j in range(m + 1)]
    probes.extend(
        unit(i, j) for i in range(-m, m + 1) for j in range(-m, m + 1)
    )
    return TestSet(probes=tuple(probes))


def weak_star_distance(
    phi: FunctionalRep, psi: FunctionalRep, probes: TestSet
) -> float:
    return max(
        abs(eval_functional(phi, f) - eval_functional(psi, f))
        for f in probes.probes
    )


def strong_limit_distance(a: FiniteMatrix, b: FiniteMatrix, window: int) -> float:
    """max over basis vectors e_j, |j| <= window, of the column norm of
    (a - b) e_j; the finite proxy for strong convergence on the window."""
    diff = a - b
    sq: dict[int, float] = {}
    for (_, j), v in diff.items():
        sq[j] = sq.get(j, 0.0) + v * v
    return max(
        (math.sqrt(s) for j, s in sq.items() if abs(j) <= window),
        default=0.0,
    )


def _exp_label(r: int, sign: str, star: bool) -> str:
    mark = "*" if star else ""
    return f"({mark}{sign}{r}n)"


def dual_single_label(m: int, l: int, r: int, sign: str, star: bool) -> str:
    return f"norm(P{m} W{l}^{_exp_label(r, sign, star)})"


def dual_cross_label(m: int, s: int, rs: int, l: int, rl: int, star: bool) -> str:
    return (
        f"norm(P{m} W{s}^{_exp_label(rs, '-', star)}"
        f" W{l}^{_exp_label(rl, '+', star)})"
    )


def _dual_quantities(inst: CriterionInstance, star: bool):
    out = []
    for l, (w, r) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        out.append((dual_single_label(inst.m, l, r, "+", star), ((w, r),)))
        out.append((dual_single_label(inst.m, l, r, "-", star), ((w, -r),)))
    for l, (wl, rl) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        for s, (ws, rs) in enumerate(zip(inst.shifts, inst.r_list), start=1):
            if s == l:
                continue
            out.append(
                (
                    dual_cross_label(inst.m, s, rs, l, rl, star),
                    ((ws, -rs), (wl, rl)),
                )
            )
    return out


def check_dual_sufficient(
    inst: CriterionInstance, tol: float, *, star: bool = True
) -> list[DecayReport]:
    """Right-sided projected norms ||P_m W_l^{+r_l n}||, ||P_m W_l^{-r_l n}||
    and ||P_m W_s^{-r_s n} W_l^{+r_l n}|| along n_k, with every shift factor
    starred when the scenario acts by adjoints.

    Joint decay is the sufficient condition for the transposed operator
    tuple to mix finite-representer functionals.
    """
    ns = inst.n_values()
    reports = []
    for label, factors in _dual_quantities(inst, star):
        vals = []
        for n in ns:
            scaled = tuple((w, p * n) for w, p in factors)
            vals.append(
                monomial_product_norm_rowcut(
                    scaled, inst.m, star=star, horizon=inst.horizon
                ).value
            )
        reports.append(make_report(label, ns, vals, tol))
    return sorted(reports, key=lambda rep: rep.quantity)


def _right_mult_chain(
    mat: FiniteMatrix,
    chain,
    *,
    star: bool,
    horizon: int,
    window_cap: int,
) -> FiniteMatrix:
    out = mat
    for shift, p in chain:
        out = shift_multiply(
            out, shift, p, "right",
            star=star, horizon=horizon, window_cap=window_cap,
        )
    return out


def check_dual_witness_conditions(
    inst: CriterionInstance,
    bundle: WitnessBundle,
    tol: float,
    *,
    star: bool = True,
) -> list[DecayReport]:
    """Right-sided decay on explicit witnesses, plus the strong-convergence
    proxy distances of D_k and G_k^(l) to P_n (n = the bundle window)."""
    ns = inst.n_values()
    if bundle.n_values != ns:
        raise ValueError("bundle iterates disagree with the instance")
    if bundle.n_ops != inst.n_ops:
        raise ValueError("bundle operator count disagrees with the instance")
    n_win = bundle.m
    pn = projection_matrix(n_win)
    kwargs = dict(star=star, horizon=inst.horizon, window_cap=inst.window_cap)
    reports = []

    vals = [strong_limit_distance(d, pn, n_win) for d in bundle.d_seq]
    reports.append(make_report(f"slim-dist(D_k - P{n_win})", ns, vals, tol))
    for l, g_seq in enumerate(bundle.g_seqs, start=1):
        vals = [strong_limit_distance(g, pn, n_win) for g in g_seq]
        reports.append(
            make_report(f"slim-dist(G{l}_k - P{n_win})", ns, vals, tol)
        )

    for l, (w, r) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        star_mark = "*" if star else ""
        vals = [
            op_norm(_right_mult_chain(d, ((w, r * n),), **kwargs))
            for n, d in zip(ns, bundle.d_seq)
        ]
        reports.append(
            make_report(
                f"norm(D_k W{l}^({star_mark}+{r}n))", ns, vals, tol
            )
        )
        vals = [
            op_norm(_right_mult_chain(g, ((w, -r * n),), **kwargs))
            for n, g in zip(ns, bundle.g_seqs[l - 1])
        ]
        reports.append(
            make_report(
                f"norm(G{l}_k W{l}^({star_mark}-{r}n))", ns, vals, tol
            )
        )
    for l, (wl, rl) in enumerate(zip(inst.shifts, inst.r_list), start=1):
        for s, (ws, rs) in enumerate(zip(inst.shifts, inst.r_list), start=1):
            if s == l:
                continue
            star_mark = "*" if star else ""
            vals = [
                op_norm(
                    _right_mult_chain(
                        g, ((ws, -rs * n), (wl, rl * n)), **kwargs
                    )
                )
                for n, g in zip(ns, bundle.g_seqs[l - 1])
            ]
            reports.append(
                make_report(
                    f"norm(G{l}_k W{s}^({star_mark}-{rs}n)"
                    f" W{l}^({star_mark}+{rl}n))",
                    ns,
                    vals,
                    tol,
                )
            )
    return sorted(reports, key=lambda rep: rep.quantity)


def construct_dual_approximant(
    bundle: WitnessBundle,
    psi: FunctionalRep,
    phi_list: Sequence[FunctionalRep],
    inst: CriterionInstance,
    k: int,
    *,
    star: bool = False,
) -> FunctionalRep:
    """eta_k with representer A_psi P_n D_k + sum_l of the transported
    A_{phi_l} P_n G_k^(l) pulled back by the inverse transpose powers."""
    if not 1 <= k <= bundle.k_max:
        raise ValueError("k outside the bundle range")
    if len(phi_list) != inst.n_ops or bundle.n_ops != inst.n_ops:
        raise ValueError("phi_list, bundle and instance disagree on N")
    n = bundle.n_values[k - 1]
    pn = projection_matrix(bundle.m)
    rep = compose(psi.representer, compose(pn, bundle.d_seq[k - 1]))
    for op, r, g_seq, phi in zip(
        inst.elementary_ops(), inst.r_list, bundle.g_seqs, phi_list
    ):
        inner = FunctionalRep(
            compose(phi.representer, compose(pn, g_seq[k - 1]))
        )
        moved = dual_apply_power(
            op, -r * n, inner,
            star=star, horizon=inst.horizon, window_cap=inst.window_cap,
        )
        rep = rep + moved.representer
    return FunctionalRep(rep)


def verify_dual_convergence(
    bundle: WitnessBundle,
    psi: FunctionalRep,
    phi_list: Sequence[FunctionalRep],
    inst: CriterionInstance,
    probes: TestSet,
    tol: float,
    *,
    star: bool = True,
) -> tuple[list[DecayReport], list[FunctionalRep]]:
    """Weak-* distances of eta_k to its targets along k, with termwise
    trace-norm bounds, and the eta_k representers themselves.

    The bound column majorizes each probe distance: probe norms are at most
    one, the functional norm of a representer is at most its trace norm, and
    right factors split off at operator norm.
    """
    ns = bundle.n_values
    n_win = bundle.m
    pn = projection_matrix(n_win)
    ops = inst.elementary_ops()
    kwargs = dict(star=star, horizon=inst.horizon, window_cap=inst.window_cap)

    psi_target = m_d(psi, Projection(n_win))
    phi_targets = [m_d(phi, Projection(n_win)) for phi in phi_list]
    psi_tn = trace_norm(psi.representer)
    phi_tns = [trace_norm(phi.representer) for phi in phi_list]

    etas = [
        construct_dual_approximant(bundle, psi, phi_list, inst, k, star=star)
        for k in range(1, bundle.k_max + 1)
    ]

    reports = []
    vals, bounds = [], []
    for k, (n, eta) in enumerate(zip(ns, etas), start=1):
        vals.append(weak_star_distance(eta, psi_target, probes))
        pnd = compose(pn, bundle.d_seq[k - 1])
        bound = psi_tn * op_norm(pnd - pn)
        for l, (w, r, phi_tn) in enumerate(
            zip(inst.shifts, inst.r_list, phi_tns), start=1
        ):
            png = compose(pn, bundle.g_seqs[l - 1][k - 1])
            bound += phi_tn * op_norm(
                _right_mult_chain(png, ((w, -r * n),), **kwargs)
            )
        bounds.append(bound)
    reports.append(
        make_report(
            f"wstar-dist(eta_k - M_P{n_win} psi)", ns, vals, tol, bounds=bounds
        )
    )

    star_mark = "*" if star else ""
    for l, (op_l, rl) in enumerate(zip(ops, inst.r_list), start=1):
        vals, bounds = [], []
        for k, (n, eta) in enumerate(zip(ns, etas), start=1):
            moved = dual_apply_power(op_l, rl * n, eta, **kwargs)
            vals.append(weak_star_distance(moved, phi_targets[l - 1], probes))

            pnd = compose(pn, bundle.d_seq[k - 1])
            bound = psi_tn * op_norm(
                _right_mult_chain(pnd, ((inst.shifts[l - 1], rl * n),), **kwargs)
            )
            png = compose(pn, bundle.g_seqs[l - 1][k - 1])
            bound += phi_tns[l - 1] * op_norm(png - pn)
            for s, (ws, rs) in enumerate(zip(inst.shifts, inst.r_list), start=1):
                if s == l:
                    continue
                png_s = compose(pn, bundle.g_seqs[s - 1][k - 1])
                chain = ((ws, -rs * n), (inst.shifts[l - 1], rl * n))
                bound += phi_tns[s - 1] * op_norm(
                    _right_mult_chain(png_s, chain, **kwargs)
                )
            bounds.append(bound)
        reports.append(
            make_report(
                f"wstar-dist(T{l}^({star_mark}+{rl}n) eta_k - M_P{n_win} phi{l})",
                ns,
                vals,
                tol,
                bounds=bounds,
            )
        )
    return reports, etas
