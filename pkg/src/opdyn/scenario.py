"""Versioned plain-text scenario format and the built-in scenarios.

A scenario file is line-oriented: the first non-blank line must be the
marker ``opdyn-scenario v1``; every following line is ``key = value`` with
``#`` starting a comment.  Numbers accept decimals, scientific notation and
exact fractions like ``1/3``.  Unknown keys are rejected so typos cannot
silently change a run.

Example::

    opdyn-scenario v1
    name = demo
    mode = corollary
    unitary = translation 1
    weight1 = piecewise 2 1/2
    weight2 = piecewise 3 1/3
    r_list = 1 2
    n_seq = all-k       # or: arithmetic a b | explicit 1 2 4 8
    m = 1
    k_max = 40
    tol = 1e-6
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from fractions import Fraction

from .criteria import DEFAULT_K_MAX, DEFAULT_TOL, CriterionInstance, NSeq
from .errors import ScenarioError
from .finmat import DEFAULT_WINDOW_CAP
from .lattice import (
    DEFAULT_HORIZON,
    PermutationUnitary,
    WeightRule,
    WeightedShift,
)

SCENARIO_HEADER = "opdyn-scenario v1"

MODES = (
    "corollary",
    "theorem",
    "criterion-pointwise",
    "construct-phi",
    "orbit",
    "dual-transitivity",
    "example24",
    "example28",
)

_KNOWN_KEYS = frozenset(
    {
        "name",
        "mode",
        "orientation",
        "unitary",
        "r_list",
        "n_seq",
        "m",
        "k_max",
        "tol",
        "horizon",
        "window_cap",
        "adjoint_weights",
        "targets",
        "seeds",
        "witnesses",
    }
)

#: Modes whose operator block is pinned to the canonical two-shift setup.
_CANONICAL_MODES = ("example24", "example28")


@dataclass(frozen=True)
class Scenario:
    name: str
    mode: str
    orientation: str
    unitary: PermutationUnitary
    weights: tuple[WeightRule, ...]
    r_list: tuple[int, ...]
    n_seq: NSeq
    m: int
    k_max: int
    tol: float
    horizon: int
    window_cap: int
    adjoint_weights: bool
    targets: tuple[str, ...] = ()
    seeds: tuple[str, ...] = ()
    witnesses: str | None = None

    def to_instance(self, m: int | None = None) -> CriterionInstance:
        return CriterionInstance(
            shifts=tuple(WeightedShift(rule) for rule in self.weights),
            unitary=self.unitary,
            r_list=self.r_list,
            n_seq=self.n_seq,
            m=self.m if m is None else m,
            k_max=self.k_max,
            horizon=self.horizon,
            window_cap=self.window_cap,
            orientation=self.orientation,
        )


def _parse_number(tok: str) -> float:
    if "/" in tok:
        return float(Fraction(tok))
    return float(tok)


class _Parser:
    def __init__(self, text: str, base_dir: str):
        self.base_dir = base_dir
        self.diags: list[str] = []
        self.fields: dict[str, str] = {}
        self.weight_fields: dict[int, str] = {}
        self._scan(text)

    def diag(self, msg: str) -> None:
        self.diags.append(msg)

    def _scan(self, text: str) -> None:
        lines = text.splitlines()
        body: list[tuple[int, str]] = []
        for no, raw in enumerate(lines, start=1):
            stripped = raw.split("#", 1)[0].strip()
            if stripped:
                body.append((no, stripped))
        if not body:
            self.diag(f"missing header line {SCENARIO_HEADER!r}")
            return
        first_no, first = body[0]
        if first != SCENARIO_HEADER:
            self.diag(
                f"line {first_no}: first line must be {SCENARIO_HEADER!r}"
            )
            return
        for no, line in body[1:]:
            if "=" not in line:
                self.diag(f"line {no}: expected 'key = value'")
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not value:
                self.diag(f"line {no}: empty value for {key!r}")
                continue
            if key.startswith("weight") and key[6:].isdigit():
                idx = int(key[6:])
                if idx in self.weight_fields:
                    self.diag(f"line {no}: duplicate key {key!r}")
                    continue
                self.weight_fields[idx] = value
                continue
            if key not in _KNOWN_KEYS:
                self.diag(f"line {no}: unknown key {key!r}")
                continue
            if key in self.fields:
                self.diag(f"line {no}: duplicate key {key!r}")
                continue
            self.fields[key] = value

    # typed getters; each returns None and records a diagnostic on failure

    def get_int(self, key: str, minimum: int):
        raw = self.fields.get(key)
        if raw is None:
            return None
        try:
            value = int(raw)
        except ValueError:
            self.diag(f"{key}: not an integer: {raw!r}")
            return None
        if value < minimum:
            self.diag(f"{key}: must be at least {minimum}")
            return None
        return value

    def get_number(self, key: str):
        raw = self.fields.get(key)
        if raw is None:
            return None
        try:
            return _parse_number(raw)
        except (ValueError, ZeroDivisionError):
            self.diag(f"{key}: not a number: {raw!r}")
            return None

    def get_bool(self, key: str):
        raw = self.fields.get(key)
        if raw is None:
            return None
        if raw == "true":
            return True
        if raw == "false":
            return False
        self.diag(f"{key}: expected true or false, got {raw!r}")
        return None

    def get_unitary(self):
        raw = self.fields.get("unitary")
        if raw is None:
            return None
        toks = raw.split()
        if toks[0] == "translation":
            if len(toks) != 2:
                self.diag("unitary: translation takes exactly one integer")
                return None
            try:
                t = int(toks[1])
            except ValueError:
                self.diag(f"unitary: bad translation step {toks[1]!r}")
                return None
            try:
                return PermutationUnitary.translation(t)
            except ValueError as exc:
                self.diag(f"unitary: {exc}")
                return None
        if toks[0] == "table":
            mapping = {}
            for tok in toks[1:]:
                left, sep, right = tok.partition(":")
                if not sep:
                    self.diag(f"unitary: bad table pair {tok!r}")
                    return None
                try:
                    src, dst = int(left), int(right)
                except ValueError:
                    self.diag(f"unitary: bad table pair {tok!r}")
                    return None
                if src in mapping:
                    self.diag(f"unitary: duplicate table index {src}")
                    return None
                mapping[src] = dst
            if not mapping:
                self.diag("unitary: table needs at least one pair")
                return None
            try:
                return PermutationUnitary.from_table(mapping)
            except ValueError as exc:
                self.diag(f"unitary: {exc}")
                return None
        self.diag(f"unitary: unknown form {toks[0]!r}")
        return None

    def get_weight_rule(self, idx: int):
        raw = self.weight_fields[idx]
        toks = raw.split()
        key = f"weight{idx}"
        if toks[0] == "piecewise":
            if len(toks) != 3:
                self.diag(f"{key}: piecewise takes two numbers")
                return None
            try:
                neg, nonneg = _parse_number(toks[1]), _parse_number(toks[2])
            except (ValueError, ZeroDivisionError):
                self.diag(f"{key}: bad piecewise weights {raw!r}")
                return None
            try:
                return WeightRule.piecewise(neg, nonneg)
            except ValueError as exc:
                self.diag(f"{key}: {exc}")
                return None
        if toks[0] == "explicit":
            if len(toks) < 2:
                self.diag(f"{key}: explicit needs a default weight")
                return None
            try:
                default = _parse_number(toks[1])
            except (ValueError, ZeroDivisionError):
                self.diag(f"{key}: bad default weight {toks[1]!r}")
                return None
            table = {}
            for tok in toks[2:]:
                left, sep, right = tok.partition(":")
                try:
                    j = int(left)
                    w = _parse_number(right) if sep else None
                except (ValueError, ZeroDivisionError):
                    w = None
                if w is None:
                    self.diag(f"{key}: bad table pair {tok!r}")
                    return None
                if j in table:
                    self.diag(f"{key}: duplicate table index {j}")
                    return None
                table[j] = w
            try:
                return WeightRule.explicit(table, default=default)
            except ValueError as exc:
                self.diag(f"{key}: {exc}")
                return None
        self.diag(f"{key}: unknown form {toks[0]!r}")
        return None

    def get_int_list(self, key: str):
        raw = self.fields.get(key)
        if raw is None:
            return None
        try:
            return tuple(int(tok) for tok in raw.split())
        except ValueError:
            self.diag(f"{key}: expected integers: {raw!r}")
            return None

    def get_paths(self, key: str):
        raw = self.fields.get(key)
        if raw is None:
            return ()
        return tuple(
            os.path.normpath(os.path.join(self.base_dir, tok))
            for tok in raw.split()
        )

    def get_n_seq(self):
        raw = self.fields.get("n_seq")
        if raw is None:
            return NSeq.all_k()
        toks = raw.split()
        if toks[0] == "all-k":
            if len(toks) != 1:
                self.diag("n_seq: all-k takes no arguments")
                return None
            return NSeq.all_k()
        if toks[0] == "arithmetic":
            if len(toks) != 3:
                self.diag("n_seq: arithmetic takes two integers")
                return None
            try:
                a, b = int(toks[1]), int(toks[2])
                return NSeq.arithmetic(a, b)
            except ValueError as exc:
                self.diag(f"n_seq: {exc}")
                return None
        if toks[0] == "explicit":
            try:
                values = [int(tok) for tok in toks[1:]]
            except ValueError:
                self.diag(f"n_seq: expected integers: {raw!r}")
                return None
            if any(y <= x for x, y in zip(values, values[1:])):
                self.diag("n_seq: not strictly increasing")
                return None
            try:
                return NSeq.explicit(values)
            except ValueError as exc:
                self.diag(f"n_seq: {exc}")
                return None
        self.diag(f"n_seq: unknown rule {toks[0]!r}")
        return None


def _canonical_weights() -> tuple[WeightRule, WeightRule]:
    return (
        WeightRule.piecewise(2.0, 0.5),
        WeightRule.piecewise(3.0, 1.0 / 3.0),
    )


def _is_canonical(scn_weights, unitary, r_list, orientation, n_seq) -> bool:
    want = _canonical_weights()
    if scn_weights != want:
        return False
    if unitary.kind != "translation" or unitary.t != 1:
        return False
    if len(r_list) != 2 or r_list[1] != 2 * r_list[0]:
        return False
    if orientation != "WFU":
        return False
    return n_seq == NSeq.all_k()


def analyze_scenario(text: str, base_dir: str = ".") -> tuple[Scenario | None, list[str]]:
    """Parse and cross-check; returns (scenario-or-None, diagnostics).

    The scenario is only returned when the diagnostics list is empty.
    """
    p = _Parser(text, base_dir)
    if p.diags:
        return None, p.diags

    name = p.fields.get("name")
    if name is None:
        p.diag("name is required")
    mode = p.fields.get("mode")
    if mode is None:
        p.diag("mode is required")
    elif mode not in MODES:
        p.diag(f"mode: unknown mode {mode!r}")
        mode = None

    orientation = p.fields.get("orientation", "WFU")
    if orientation not in ("WFU", "UFW"):
        p.diag(f"orientation: must be WFU or UFW, got {orientation!r}")
        orientation = "WFU"

    canonical = mode in _CANONICAL_MODES if mode else False

    unitary = p.get_unitary()
    weights: list[WeightRule] = []
    if p.weight_fields:
        expected = list(range(1, len(p.weight_fields) + 1))
        if sorted(p.weight_fields) != expected:
            p.diag("weight keys must be weight1..weightN without gaps")
        else:
            for idx in expected:
                rule = p.get_weight_rule(idx)
                if rule is not None:
                    weights.append(rule)
    r_list = p.get_int_list("r_list")
    n_seq = p.get_n_seq()
    m = p.get_int("m", 0)
    k_max = p.get_int("k_max", 1)
    tol = p.get_number("tol")
    horizon = p.get_int("horizon", 1)
    window_cap = p.get_int("window_cap", 1)
    adjoint = p.get_bool("adjoint_weights")
    targets = p.get_paths("targets")
    seeds = p.get_paths("seeds")
    witnesses = p.get_paths("witnesses")

    if canonical:
        if unitary is None and "unitary" not in p.fields:
            unitary = PermutationUnitary.translation(1)
        if not p.weight_fields:
            weights = list(_canonical_weights())
        if r_list is None:
            r_list = (1, 2)
        if m is None and "m" not in p.fields:
            m = 1
        if mode == "example28" and adjoint is None:
            adjoint = True
    else:
        for key, present in (
            ("unitary", unitary is not None),
            ("m", m is not None),
            ("r_list", r_list is not None),
        ):
            if not present and key not in p.fields:
                p.diag(f"{key} is required for mode {mode!r}")
        if not p.weight_fields:
            p.diag(f"at least weight1 is required for mode {mode!r}")

    if k_max is None and "k_max" not in p.fields:
        k_max = DEFAULT_K_MAX
    if tol is None and "tol" not in p.fields:
        tol = DEFAULT_TOL
    elif tol is not None and not tol > 0.0:
        p.diag("tol: must be strictly positive")
        tol = None
    if horizon is None and "horizon" not in p.fields:
        horizon = DEFAULT_HORIZON
    if window_cap is None and "window_cap" not in p.fields:
        window_cap = DEFAULT_WINDOW_CAP
    if adjoint is None and "adjoint_weights" not in p.fields:
        adjoint = False

    if r_list is not None:
        if any(r < 1 for r in r_list):
            p.diag("r_list: entries must be positive")
        elif any(y <= x for x, y in zip(r_list, r_list[1:])):
            p.diag("r_list: not strictly increasing")
        elif weights and len(r_list) != len(weights):
            p.diag("r_list: must pair with weight1..weightN")

    if m is not None and window_cap is not None and window_cap < m:
        p.diag("window_cap: smaller than m")

    if len(witnesses) > 1:
        p.diag("witnesses: expected a single directory")

    if mode == "criterion-pointwise" and not seeds:
        p.diag("seeds are required for mode 'criterion-pointwise'")
    if mode == "orbit" and not seeds:
        p.diag("seeds are required for mode 'orbit'")
    if mode == "construct-phi" and not targets:
        p.diag("targets are required for mode 'construct-phi'")
    if mode == "theorem" and not witnesses:
        p.diag("witnesses directory is required for mode 'theorem'")
    if (
        mode == "construct-phi"
        and targets
        and r_list is not None
        and len(targets) != len(r_list) + 1
    ):
        p.diag("targets: need one F file plus one E file per operator")

    if canonical and not p.diags:
        if not _is_canonical(tuple(weights), unitary, r_list, orientation, n_seq):
            p.diag(
                f"mode {mode!r} requires the canonical two-shift configuration"
            )
        if mode == "example28" and adjoint is not True:
            p.diag("mode 'example28' requires adjoint_weights = true")

    if p.diags:
        return None, sorted(set(p.diags))

    scenario = Scenario(
        name=name,
        mode=mode,
        orientation=orientation,
        unitary=unitary,
        weights=tuple(weights),
        r_list=tuple(r_list),
        n_seq=n_seq,
        m=m,
        k_max=k_max,
        tol=tol,
        horizon=horizon,
        window_cap=window_cap,
        adjoint_weights=bool(adjoint),
        targets=targets,
        seeds=seeds,
        witnesses=witnesses[0] if witnesses else None,
    )
    return scenario, []


def parse_scenario(text: str, base_dir: str = ".") -> Scenario:
    scenario, diags = analyze_scenario(text, base_dir)
    if scenario is None:
        raise ScenarioError(diags)
    return scenario


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError([f"cannot read scenario file: {exc}"]) from exc
    return parse_scenario(text, base_dir=os.path.dirname(os.path.abspath(path)))


EXAMPLE24_TEXT = """\
opdyn-scenario v1
# Two-shift tuple on the integer lattice with doubled second exponent.
name = example24
mode = example24
unitary = translation 1
weight1 = piecewise 2 1/2
weight2 = piecewise 3 1/3
r_list = 1 2
n_seq = all-k
m = 1
k_max = 40
tol = 1e-6
"""

EXAMPLE28_TEXT = """\
opdyn-scenario v1
# Transposed action of the canonical two-shift tuple via adjoint weights.
name = example28
mode = example28
unitary = translation 1
weight1 = piecewise 2 1/2
weight2 = piecewise 3 1/3
r_list = 1 2
n_seq = all-k
m = 1
k_max = 50
tol = 1e-6
adjoint_weights = true
"""

BUILTIN_SCENARIOS: dict[str, str] = {
    "example24": EXAMPLE24_TEXT,
    "example28": EXAMPLE28_TEXT,
}


def list_builtin() -> list[str]:
    return sorted(BUILTIN_SCENARIOS)


def load_builtin(name: str) -> Scenario:
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError([f"unknown builtin scenario {name!r}"])
    return parse_scenario(BUILTIN_SCENARIOS[name])


def with_overrides(
    scenario: Scenario,
    *,
    tol: float | None = None,
    k_max: int | None = None,
    horizon: int | None = None,
) -> Scenario:
    out = scenario
    if tol is not None:
        if not tol > 0.0:
            raise ScenarioError(["tol override must be strictly positive"])
        out = replace(out, tol=tol)
    if k_max is not None:
        if k_max < 1:
            raise ScenarioError(["k_max override must be at least 1"])
        out = replace(out, k_max=k_max)
    if horizon is not None:
        if horizon < 1:
            raise ScenarioError(["horizon override must be at least 1"])
        out = replace(out, horizon=horizon)
    return out
