"""Scenario-driven command line front end.

Subcommands:

* ``run <scenario> [--out DIR] [--tol X] [--kmax K] [--horizon H]`` executes
  a scenario file (or a built-in scenario by name) and writes ``report.csv``,
  ``summary.txt`` and any constructed matrices into the output directory.
* ``validate <scenario>`` prints schema and consistency diagnostics without
  running anything.
* ``list-builtin`` prints the names of the shipped scenarios.

Exit codes: 0 success (all verdicts decay, or the mode has no verdicts),
1 some verdict is not decays-below, 2 schema or format violation,
3 transport horizon or window cap exceeded, 4 iterative norm failed to
converge.  Environment variables are never consulted.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .constructor import (
    TargetTuple,
    construct_approximant,
    default_bundle,
    load_bundle,
    verify_approximant_convergence,
)
from .criteria import (
    CriterionInstance,
    all_decay,
    check_pointwise_decay,
    check_sufficient_decay,
    check_witness_conditions,
    cross_label,
    neg_label,
    pos_label,
    render_summary,
    write_reports_csv,
)
from .duality import (
    FunctionalRep,
    check_dual_sufficient,
    check_dual_witness_conditions,
    default_probes,
    dual_cross_label,
    dual_single_label,
    verify_dual_convergence,
)
from .elementary import orbit, orbit_distances, write_orbit_csv
from .errors import (
    ConvergenceError,
    FormatError,
    HorizonExceeded,
    ScenarioError,
    WindowExceeded,
)
from .finmat import load_finmat, op_norm, projection_matrix, save_finmat, unit
from .scenario import (
    BUILTIN_SCENARIOS,
    Scenario,
    analyze_scenario,
    list_builtin,
    parse_scenario,
    with_overrides,
)

#: Window sweep used by the built-in example modes.
EXAMPLE_SWEEP = range(5)


def _resolve_text(ref: str) -> tuple[str, str]:
    """Scenario text and base directory for a file path or builtin name."""
    if os.path.isfile(ref):
        with open(ref, "r", encoding="utf-8") as fh:
            return fh.read(), os.path.dirname(os.path.abspath(ref))
    if ref in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[ref], "."
    raise ScenarioError([f"no such scenario file or builtin: {ref}"])


def _load_matrix(path: str):
    try:
        return load_finmat(path)
    except OSError as exc:
        raise ScenarioError([f"cannot read matrix file: {exc}"]) from exc


def _load_witness_bundle(scenario: Scenario, inst: CriterionInstance):
    bundle, r_list = load_bundle(scenario.witnesses)
    problems = []
    if r_list != inst.r_list:
        problems.append("witness bundle exponents disagree with r_list")
    if bundle.m != inst.m:
        problems.append("witness bundle window disagrees with m")
    if bundle.n_values != inst.n_values():
        problems.append("witness bundle iterates disagree with n_seq/k_max")
    if bundle.n_ops != inst.n_ops:
        problems.append("witness bundle operator count disagrees with weights")
    if problems:
        raise ScenarioError(problems)
    return bundle


def _attach_bounds(reports, label_to_bounds):
    out = []
    for rep in reports:
        bounds = label_to_bounds.get(rep.quantity)
        if bounds is not None:
            rep = replace(
                rep, bounds=tuple((k, b) for k, b in enumerate(bounds, start=1))
            )
        out.append(rep)
    return out


def _mode_corollary(scenario: Scenario):
    inst = scenario.to_instance()
    return check_sufficient_decay(inst, scenario.tol), {}


def _mode_theorem(scenario: Scenario):
    inst = scenario.to_instance()
    bundle = _load_witness_bundle(scenario, inst)
    reports = check_witness_conditions(
        inst, bundle.d_seq, bundle.g_seqs, scenario.tol
    )
    return reports, {}


def _mode_pointwise(scenario: Scenario):
    inst = scenario.to_instance()
    seeds = [_load_matrix(path) for path in scenario.seeds]
    return check_pointwise_decay(inst, seeds, scenario.tol), {}


def _mode_construct_phi(scenario: Scenario):
    inst = scenario.to_instance()
    mats = [_load_matrix(path) for path in scenario.targets]
    try:
        targets = TargetTuple(f=mats[0], e_list=tuple(mats[1:]), m=inst.m)
    except ValueError as exc:
        raise ScenarioError([f"targets: {exc}"]) from exc
    if scenario.witnesses is not None:
        bundle = _load_witness_bundle(scenario, inst)
    else:
        bundle = default_bundle(inst)
    reports = verify_approximant_convergence(bundle, targets, inst, scenario.tol)
    artifacts = {
        f"approximant_k{k:04d}.finmat": construct_approximant(
            bundle, targets, inst, k
        )
        for k in range(1, bundle.k_max + 1)
    }
    return reports, artifacts


def _mode_dual(scenario: Scenario):
    star = scenario.adjoint_weights
    inst = scenario.to_instance()
    reports = check_dual_sufficient(inst, scenario.tol, star=star)
    if scenario.witnesses is not None:
        bundle = _load_witness_bundle(scenario, inst)
        reports.extend(
            check_dual_witness_conditions(inst, bundle, scenario.tol, star=star)
        )
    else:
        bundle = default_bundle(inst)
    eta_reports, etas = verify_dual_convergence(
        bundle,
        _default_psi(inst.m),
        _default_phis(inst.n_ops),
        inst,
        default_probes(inst.m),
        scenario.tol,
        star=star,
    )
    reports.extend(eta_reports)
    artifacts = {
        f"eta_k{k:04d}.finmat": eta.representer
        for k, eta in enumerate(etas, start=1)
    }
    return sorted(reports, key=lambda rep: rep.quantity), artifacts


def _default_psi(m: int) -> FunctionalRep:
    return FunctionalRep(projection_matrix(m))


def _default_phis(count: int) -> list[FunctionalRep]:
    return [FunctionalRep(unit(0, 0)) for _ in range(count)]


def _mode_example24(scenario: Scenario):
    """Sufficient-decay families swept over windows 0..4, the two cross
    columns carrying their closed-form geometric bounds."""
    reports = []
    for mm in EXAMPLE_SWEEP:
        inst = scenario.to_instance(m=mm)
        r1, r2 = inst.r_list
        ns = inst.n_values()
        bounds = {
            cross_label(1, r1, 2, r2, mm): [
                3.0 ** (2 * mm) / 3.0 ** (r1 * n) for n in ns
            ],
            cross_label(2, r2, 1, r1, mm): [
                3.0 ** (2 * mm) / 2.0 ** (r1 * n) for n in ns
            ],
        }
        reports.extend(
            _attach_bounds(check_sufficient_decay(inst, scenario.tol), bounds)
        )
    return sorted(reports, key=lambda rep: rep.quantity), {}


def _mode_example28(scenario: Scenario):
    """Adjoint-shift right-sided families swept over windows 0..4, each
    carrying the mirrored left-sided value in the bound column, plus the
    weak-* approximant convergence run at the scenario window."""
    reports = []
    for mm in EXAMPLE_SWEEP:
        inst = scenario.to_instance(m=mm)
        r1, r2 = inst.r_list
        primal = {
            rep.quantity: [v for _, v in rep.values]
            for rep in check_sufficient_decay(inst, scenario.tol)
        }
        pair_map = {
            dual_single_label(mm, 1, r1, "+", True): pos_label(1, r1, mm),
            dual_single_label(mm, 1, r1, "-", True): neg_label(1, r1, mm),
            dual_single_label(mm, 2, r2, "+", True): pos_label(2, r2, mm),
            dual_single_label(mm, 2, r2, "-", True): neg_label(2, r2, mm),
            dual_cross_label(mm, 2, r2, 1, r1, True): cross_label(1, r1, 2, r2, mm),
            dual_cross_label(mm, 1, r1, 2, r2, True): cross_label(2, r2, 1, r1, mm),
        }
        bounds = {
            dual: primal[left] for dual, left in pair_map.items()
        }
        reports.extend(
            _attach_bounds(
                check_dual_sufficient(inst, scenario.tol, star=True), bounds
            )
        )

    inst = scenario.to_instance()
    bundle = default_bundle(inst)
    eta_reports, etas = verify_dual_convergence(
        bundle,
        _default_psi(inst.m),
        _default_phis(inst.n_ops),
        inst,
        default_probes(inst.m),
        scenario.tol,
        star=True,
    )
    reports.extend(eta_reports)
    artifacts = {
        f"eta_k{k:04d}.finmat": eta.representer
        for k, eta in enumerate(etas, start=1)
    }
    return sorted(reports, key=lambda rep: rep.quantity), artifacts


def _run_orbit(scenario: Scenario, outdir: str) -> int:
    inst = scenario.to_instance()
    ops = list(zip(inst.elementary_ops(), inst.r_list))
    n_max = inst.n_values()[-1]
    seeds = [_load_matrix(path) for path in scenario.seeds]
    targets = None
    if scenario.targets:
        if len(scenario.targets) != inst.n_ops:
            raise ScenarioError(["targets: orbit mode needs one per operator"])
        targets = [_load_matrix(path) for path in scenario.targets]
    kwargs = dict(horizon=inst.horizon, window_cap=inst.window_cap)
    rows = []
    for seed in seeds:
        if targets is not None:
            rows.extend(orbit_distances(ops, seed, targets, n_max, **kwargs))
        else:
            rows.extend(
                (n, l, op_norm(mat))
                for n, l, mat in orbit(ops, seed, n_max, **kwargs)
            )
    with open(
        os.path.join(outdir, "orbit.csv"), "w", encoding="ascii", newline=""
    ) as fh:
        write_orbit_csv(rows, fh)
    with open(
        os.path.join(outdir, "report.csv"), "w", encoding="ascii", newline=""
    ) as fh:
        write_reports_csv([], fh)
    with open(
        os.path.join(outdir, "summary.txt"), "w", encoding="ascii", newline=""
    ) as fh:
        fh.write(f"orbit rows: {len(rows)}\n")
    return 0


_MODE_HANDLERS = {
    "corollary": _mode_corollary,
    "theorem": _mode_theorem,
    "criterion-pointwise": _mode_pointwise,
    "construct-phi": _mode_construct_phi,
    "dual-transitivity": _mode_dual,
    "example24": _mode_example24,
    "example28": _mode_example28,
}


def _cmd_run(args) -> int:
    text, base_dir = _resolve_text(args.scenario)
    scenario = parse_scenario(text, base_dir)
    scenario = with_overrides(
        scenario, tol=args.tol, k_max=args.kmax, horizon=args.horizon
    )
    outdir = args.out if args.out is not None else os.path.join("runs", scenario.name)
    os.makedirs(outdir, exist_ok=True)

    if scenario.mode == "orbit":
        return _run_orbit(scenario, outdir)

    reports, artifacts = _MODE_HANDLERS[scenario.mode](scenario)
    with open(
        os.path.join(outdir, "report.csv"), "w", encoding="ascii", newline=""
    ) as fh:
        write_reports_csv(reports, fh)
    with open(
        os.path.join(outdir, "summary.txt"), "w", encoding="ascii", newline=""
    ) as fh:
        fh.write(render_summary(reports))
    for name, mat in sorted(artifacts.items()):
        save_finmat(mat, os.path.join(outdir, name))
    return 0 if all_decay(reports) else 1


def _cmd_validate(args) -> int:
    text, base_dir = _resolve_text(args.scenario)
    _, diags = analyze_scenario(text, base_dir)
    if not diags:
        print("ok")
        return 0
    for diag in diags:
        print(diag)
    return 2


def _cmd_list_builtin() -> int:
    for name in list_builtin():
        print(name)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opdyn",
        description="Decay criteria and approximant constructions for "
        "two-sided multiplication operators on lattice matrix spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario and write reports")
    run_p.add_argument("scenario", help="scenario file path or builtin name")
    run_p.add_argument("--out", help="output directory (default runs/<name>)")
    run_p.add_argument("--tol", type=float, help="override the tolerance")
    run_p.add_argument("--kmax", type=int, help="override k_max")
    run_p.add_argument("--horizon", type=int, help="override the horizon")

    val_p = sub.add_parser("validate", help="check a scenario without running")
    val_p.add_argument("scenario", help="scenario file path or builtin name")

    sub.add_parser("list-builtin", help="list shipped scenario names")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_list_builtin()
    except ScenarioError as exc:
        for diag in exc.diagnostics:
            print(f"error: {diag}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HorizonExceeded, WindowExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
