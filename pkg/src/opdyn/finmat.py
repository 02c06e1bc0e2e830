"""Finite-rank operators as sparse real matrices over the integer lattice.

Entries live in a dict keyed by (row, col); everything downstream relies on
construction-time canonicalization (sorted keys, sub-denormal magnitudes
dropped) so that iteration order, and hence every accumulated float and every
serialized byte, is reproducible.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import ConvergenceError, FormatError, WindowExceeded
from .lattice import (
    DEFAULT_HORIZON,
    PermutationUnitary,
    WeightedShift,
    shift_power_apply,
    shift_star_power_apply,
    unitary_power_apply,
)

#: Magnitudes below this are dropped at construction.
DROP_THRESHOLD = 1e-300

#: Transported indices beyond this magnitude abort instead of truncating.
DEFAULT_WINDOW_CAP = 1 << 20

FINMAT_HEADER = "finmat v1"


class FiniteMatrix:
    """Sparse real matrix indexed by pairs of (possibly negative) integers.

    Immutable by convention: no method mutates the entry dict after
    construction.  Scalars are IEEE doubles; non-finite entries are rejected.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries=None):
        clean = {}
        if entries:
            for (i, j), v in dict(entries).items():
                v = float(v)
                if not math.isfinite(v):
                    raise ValueError(f"non-finite entry at ({i}, {j})")
                if abs(v) < DROP_THRESHOLD:
                    continue
                clean[(int(i), int(j))] = v
        self._entries = dict(sorted(clean.items()))

    def entry(self, i: int, j: int) -> float:
        return self._entries.get((i, j), 0.0)

    def items(self) -> Iterator[tuple[tuple[int, int], float]]:
        return iter(self._entries.items())

    @property
    def nnz(self) -> int:
        return len(self._entries)

    def is_zero(self) -> bool:
        return not self._entries

    def row_indices(self) -> list[int]:
        return sorted({i for i, _ in self._entries})

    def col_indices(self) -> list[int]:
        return sorted({j for _, j in self._entries})

    def support_radius(self) -> int:
        if not self._entries:
            return 0
        return max(max(abs(i), abs(j)) for i, j in self._entries)

    def transpose(self) -> "FiniteMatrix":
        return FiniteMatrix({(j, i): v for (i, j), v in self._entries.items()})

    def __add__(self, other: "FiniteMatrix") -> "FiniteMatrix":
        out = dict(self._entries)
        for key, v in other._entries.items():
            out[key] = out.get(key, 0.0) + v
        return FiniteMatrix(out)

    def __sub__(self, other: "FiniteMatrix") -> "FiniteMatrix":
        out = dict(self._entries)
        for key, v in other._entries.items():
            out[key] = out.get(key, 0.0) - v
        return FiniteMatrix(out)

    def __neg__(self) -> "FiniteMatrix":
        return FiniteMatrix({k: -v for k, v in self._entries.items()})

    def __mul__(self, scalar: float) -> "FiniteMatrix":
        return FiniteMatrix({k: v * scalar for k, v in self._entries.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMatrix):
            return NotImplemented
        return self._entries == other._entries

    __hash__ = None

    def __repr__(self) -> str:
        return f"FiniteMatrix(nnz={self.nnz})"


def unit(i: int, j: int, value: float = 1.0) -> FiniteMatrix:
    """Rank-one matrix with a single entry at (i, j)."""
    return FiniteMatrix({(i, j): value})


def projection_matrix(m: int) -> FiniteMatrix:
    """Orthogonal projection onto span{e_{-m}, ..., e_m} as a matrix."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return FiniteMatrix({(j, j): 1.0 for j in range(-m, m + 1)})


@dataclass(frozen=True)
class Projection:
    """Symbolic window projection P_m; idempotent and self-adjoint."""

    m: int

    def matrix(self) -> FiniteMatrix:
        return projection_matrix(self.m)

    def window(self) -> range:
        return range(-self.m, self.m + 1)


def compose(a: FiniteMatrix, b: FiniteMatrix) -> FiniteMatrix:
    """Matrix product a @ b."""
    b_rows: dict[int, list[tuple[int, float]]] = {}
    for (i, j), v in b.items():
        b_rows.setdefault(i, []).append((j, v))
    out: dict[tuple[int, int], float] = {}
    for (i, k), va in a.items():
        for j, vb in b_rows.get(k, ()):
            key = (i, j)
            out[key] = out.get(key, 0.0) + va * vb
    return FiniteMatrix(out)


def truncate_left(a: FiniteMatrix, m: int) -> FiniteMatrix:
    """P_m @ a: keep only the rows in [-m, m]."""
    return FiniteMatrix({(i, j): v for (i, j), v in a.items() if -m <= i <= m})


def truncate_right(a: FiniteMatrix, m: int) -> FiniteMatrix:
    """a @ P_m: keep only the columns in [-m, m]."""
    return FiniteMatrix({(i, j): v for (i, j), v in a.items() if -m <= j <= m})


def is_monomial(a: FiniteMatrix) -> bool:
    """True when every row and every column holds at most one nonzero."""
    rows, cols = set(), set()
    for (i, j), _ in a.items():
        if i in rows or j in cols:
            return False
        rows.add(i)
        cols.add(j)
    return True


def _support_seed(a: FiniteMatrix) -> int:
    payload = repr(sorted(a._entries.keys())).encode("ascii")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _dense_block(a: FiniteMatrix) -> tuple[np.ndarray, list[int], list[int]]:
    rows = a.row_indices()
    cols = a.col_indices()
    ri = {r: k for k, r in enumerate(rows)}
    ci = {c: k for k, c in enumerate(cols)}
    block = np.zeros((len(rows), len(cols)))
    for (i, j), v in a.items():
        block[ri[i], ci[j]] = v
    return block, rows, cols


def op_norm(
    a: FiniteMatrix,
    tol: float = 1e-10,
    *,
    max_iter: int = 1000,
    use_fast_paths: bool = True,
) -> float:
    """Spectral norm by power iteration on A*A restricted to the support.

    The iterate is advanced with a repeatedly squared copy of A*A so that
    near-degenerate singular values cannot stall convergence; acceptance of
    the Rayleigh quotient is residual-based on the unsquared matrix.  The
    starting vector is drawn from a generator seeded by a hash of the support,
    so results are reproducible.  Monomial matrices short-circuit to the exact
    max-|coefficient| rule unless ``use_fast_paths`` is disabled.
    """
    if not (0.0 < tol <= 1e-2):
        raise ValueError("tol must lie in (0, 1e-2]")
    if a.is_zero():
        return 0.0
    if use_fast_paths and is_monomial(a):
        return max(abs(v) for _, v in a.items())

    block, _, cols = _dense_block(a)
    amax = float(np.max(np.abs(block)))
    scaled = block / amax
    b = scaled.T @ scaled
    d = len(cols)
    if d == 1:
        return amax * math.sqrt(float(b[0, 0]))

    # Repeated squaring: power iteration with b^(2^16) steps per iterate.
    c = b / float(np.max(np.abs(b)))
    squarings = 16 if d <= 256 else 8
    for _ in range(squarings):
        c = c @ c
        peak = float(np.max(np.abs(c)))
        if peak == 0.0:
            break
        c = c / peak

    rng = np.random.default_rng(_support_seed(a))
    v = rng.standard_normal(d)
    v = v / np.linalg.norm(v)
    rho_prev = -math.inf
    stagnant = 0
    for _ in range(max_iter):
        w = c @ v
        nw = float(np.linalg.norm(w))
        if nw > 0.0 and math.isfinite(nw):
            v = w / nw
        else:
            v = np.ones(d) / math.sqrt(d)
        bv = b @ v
        rho = float(v @ bv)
        residual = float(np.linalg.norm(bv - rho * v))
        if residual <= tol * max(rho, DROP_THRESHOLD):
            return amax * math.sqrt(max(rho, 0.0))
        if abs(rho - rho_prev) <= 1e-16 * max(rho, DROP_THRESHOLD):
            stagnant += 1
            if stagnant >= 2:
                # Machine-precision stagnation under squared stepping: the
                # remaining defect is below the representable improvement.
                return amax * math.sqrt(max(rho, 0.0))
        else:
            stagnant = 0
        rho_prev = rho
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} within {max_iter} iterations"
    )


def trace_norm(
    a: FiniteMatrix, *, max_sweeps: int = 60, use_fast_paths: bool = True
) -> float:
    """Sum of singular values via one-sided Jacobi column orthogonalization.

    For a monomial matrix the columns are already orthogonal and the result
    is the exact sum of absolute coefficients.
    """
    if a.is_zero():
        return 0.0
    if use_fast_paths and is_monomial(a):
        return math.fsum(abs(v) for _, v in a.items())

    block, _, _ = _dense_block(a)
    if block.shape[1] > block.shape[0]:
        block = block.T
    amax = float(np.max(np.abs(block)))
    u = block / amax
    ncols = u.shape[1]
    converged = False
    for _ in range(max_sweeps):
        rotated = False
        for i in range(ncols - 1):
            for j in range(i + 1, ncols):
                ci = u[:, i].copy()
                cj = u[:, j].copy()
                aii = float(ci @ ci)
                ajj = float(cj @ cj)
                g = float(ci @ cj)
                if aii == 0.0 or ajj == 0.0:
                    continue
                if abs(g) <= 1e-15 * math.sqrt(aii * ajj):
                    continue
                zeta = (ajj - aii) / (2.0 * g)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                cs = 1.0 / math.hypot(1.0, t)
                sn = cs * t
                u[:, i] = cs * ci - sn * cj
                u[:, j] = sn * ci + cs * cj
                rotated = True
        if not rotated:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"one-sided Jacobi did not converge within {max_sweeps} sweeps"
        )
    return amax * math.fsum(
        float(np.linalg.norm(u[:, k])) for k in range(ncols)
    )


def shift_multiply(
    a: FiniteMatrix,
    shift: WeightedShift,
    p: int,
    side: str = "left",
    *,
    star: bool = False,
    horizon: int = DEFAULT_HORIZON,
    window_cap: int = DEFAULT_WINDOW_CAP,
) -> FiniteMatrix:
    """Multiply by W^p (or (W*)^p) on the given side by entry transport.

    Every entry moves to a single new position with an exact weight
    coefficient; no dense powers are ever formed.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    step = shift_star_power_apply if star else shift_power_apply
    out: dict[tuple[int, int], float] = {}
    for (i, j), v in a.items():
        if side == "left":
            mono = step(shift, p, i, horizon=horizon)
            key = (mono.index, j)
        else:
            # a @ W^p sends source column j to j - p (or j + p for the
            # adjoint); the coefficient is the weight product that lands
            # back on j.
            target = j + p if star else j - p
            mono = step(shift, p, target, horizon=horizon)
            key = (i, target)
        if abs(key[0]) > window_cap or abs(key[1]) > window_cap:
            raise WindowExceeded(
                f"transported index {key} exceeds window cap {window_cap}"
            )
        out[key] = out.get(key, 0.0) + v * mono.value
    return FiniteMatrix(out)


def permute_multiply(
    a: FiniteMatrix,
    unitary: PermutationUnitary,
    p: int,
    side: str = "left",
    *,
    horizon: int = DEFAULT_HORIZON,
    window_cap: int = DEFAULT_WINDOW_CAP,
) -> FiniteMatrix:
    """Multiply by U^p on the given side by relabeling rows or columns."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    out: dict[tuple[int, int], float] = {}
    for (i, j), v in a.items():
        if side == "left":
            key = (unitary_power_apply(unitary, p, i, horizon=horizon), j)
        else:
            key = (i, unitary_power_apply(unitary, -p, j, horizon=horizon))
        if abs(key[0]) > window_cap or abs(key[1]) > window_cap:
            raise WindowExceeded(
                f"transported index {key} exceeds window cap {window_cap}"
            )
        out[key] = out.get(key, 0.0) + v
    return FiniteMatrix(out)


def write_finmat(a: FiniteMatrix, fh) -> None:
    """Serialize in the 'finmat v1' text format.

    One entry per line as 'row col value' with the shortest decimal that
    round-trips the double bit-exactly.
    """
    fh.write(FINMAT_HEADER + "\n")
    for (i, j), v in a.items():
        fh.write(f"{i} {j} {v!r}\n")


def read_finmat(fh) -> FiniteMatrix:
    lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != FINMAT_HEADER:
        raise FormatError(f"missing '{FINMAT_HEADER}' header")
    entries: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected 'row col value'")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if (i, j) in entries:
            raise FormatError(f"line {lineno}: duplicate entry ({i}, {j})")
        entries[(i, j)] = v
    return FiniteMatrix(entries)


def save_finmat(a: FiniteMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        write_finmat(a, fh)


def load_finmat(path) -> FiniteMatrix:
    with open(path, "r") as fh:
        return read_finmat(fh)
