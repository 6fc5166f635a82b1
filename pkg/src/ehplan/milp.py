"""Solver-neutral mixed-integer linear program container.

Variables are allocated in named blocks; each block is an integer array of
column ids with the block's shape, so model code can address variables by
``(scenario, step, option)`` without string lookups. Constraints are added
family by family in vectorized form.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

CONTINUOUS, BINARY, INTEGER = "C", "B", "I"
LE, GE, EQ = "<=", ">=", "=="


@dataclass(frozen=True)
class LinExpr:
    """Sparse linear expression ``sum(coef * x[idx]) + const``."""

    idx: np.ndarray
    coef: np.ndarray
    const: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "idx", np.asarray(self.idx, dtype=np.int64).reshape(-1))
        object.__setattr__(self, "coef", np.asarray(self.coef, dtype=float).reshape(-1))
        if self.idx.shape != self.coef.shape:
            raise ValueError("LinExpr index and coefficient lengths differ")

    def value(self, x: np.ndarray) -> float:
        return float(self.coef @ x[self.idx] + self.const)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        return LinExpr(np.r_[self.idx, other.idx], np.r_[self.coef, other.coef], self.const + other.const)

    def scaled(self, k: float) -> "LinExpr":
        return LinExpr(self.idx, self.coef * k, self.const * k)


@dataclass
class MilpProblem:
    """Minimize ``c @ x + c0`` subject to ``A x (sense) rhs`` and bounds."""

    lb: np.ndarray
    ub: np.ndarray
    vtype: np.ndarray
    A: sparse.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    c: np.ndarray
    c0: float = 0.0
    row_tags: np.ndarray = field(default_factory=lambda: np.array([], dtype=object))
    blocks: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def integrality(self) -> np.ndarray:
        return (self.vtype != CONTINUOUS).astype(np.int8)

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.where(self.sense == LE, -np.inf, self.rhs)
        hi = np.where(self.sense == GE, np.inf, self.rhs)
        return lo, hi

    def var_census(self) -> Counter:
        return Counter({name: idx.size for name, idx in self.blocks.items()})

    def row_census(self) -> Counter:
        return Counter(self.row_tags.tolist())

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.c0)

    def check(self) -> None:
        """Assert the structural invariants of a well-formed problem."""
        n = self.n_vars
        if not (len(self.lb) == len(self.ub) == len(self.vtype) == n):
            raise ValueError("variable arrays disagree in length")
        if self.A.shape[1] != n:
            raise ValueError("constraint matrix references undeclared variables")
        if len(self.sense) != self.n_rows or len(self.rhs) != self.n_rows:
            raise ValueError("row arrays disagree in length")
        ints = self.vtype != CONTINUOUS
        if not (np.all(np.isfinite(self.lb[ints])) and np.all(np.isfinite(self.ub[ints]))):
            raise ValueError("integer variables need finite bounds")
        if np.any(self.lb > self.ub):
            raise ValueError("variable with empty domain")

    def violations(self, x: np.ndarray, tol: float = 1e-6) -> np.ndarray:
        """Row ids whose constraint is violated by more than ``tol``."""
        ax = self.A @ x
        lo, hi = self.row_bounds()
        bad = (ax < lo - tol) | (ax > hi + tol)
        return np.flatnonzero(bad)

    def var_name(self, j: int) -> str:
        for name, idx in self.blocks.items():
            flat = idx.reshape(-1)
            if flat.size and flat[0] <= j <= flat[-1]:
                pos = np.argwhere(idx == j)
                if pos.size:
                    sub = "_".join(str(p) for p in pos[0])
                    return f"{name}_{sub}" if sub else name
        return f"x{j}"

    def write_lp(self, path) -> None:
        """Write the problem in CPLEX LP text format."""
        names = [self.var_name(j) for j in range(self.n_vars)]

        def terms(cols, vals):
            parts = []
            for j, v in zip(cols, vals):
                if v == 0:
                    continue
                parts.append(f"{'-' if v < 0 else '+'} {abs(v):.12g} {names[j]}")
            return " ".join(parts) if parts else "0 " + names[0]

        nz = np.flatnonzero(self.c)
        lines = ["\\ energy hub planning problem", "Minimize", " obj: " + terms(nz, self.c[nz])]
        if self.c0:
            lines[-1] += f" + {self.c0:.12g} constant"
        lines.append("Subject To")
        A = self.A.tocsr()
        op = {LE: "<=", GE: ">=", EQ: "="}
        for i in range(self.n_rows):
            row = A.getrow(i)
            lines.append(f" r{i}_{self.row_tags[i]}: {terms(row.indices, row.data)} {op[self.sense[i]]} {self.rhs[i]:.12g}")
        lines.append("Bounds")
        if self.c0:
            lines.append(" constant = 1")
        for j in range(self.n_vars):
            lo = "-inf" if np.isneginf(self.lb[j]) else f"{self.lb[j]:.12g}"
            hi = "+inf" if np.isposinf(self.ub[j]) else f"{self.ub[j]:.12g}"
            lines.append(f" {lo} <= {names[j]} <= {hi}")
        gens = [names[j] for j in np.flatnonzero(self.vtype == INTEGER)]
        bins = [names[j] for j in np.flatnonzero(self.vtype == BINARY)]
        if gens:
            lines += ["General", " " + " ".join(gens)]
        if bins:
            lines += ["Binary", " " + " ".join(bins)]
        lines.append("End")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


class MilpBuilder:
    """Accumulates variable blocks, constraint families and objective terms."""

    def __init__(self):
        self._n = 0
        self._lb: list[np.ndarray] = []
        self._ub: list[np.ndarray] = []
        self._vt: list[np.ndarray] = []
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self._sense: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []
        self._tags: list[np.ndarray] = []
        self._m = 0
        self._obj_idx: list[np.ndarray] = []
        self._obj_val: list[np.ndarray] = []
        self.c0 = 0.0
        self.blocks: dict[str, np.ndarray] = {}

    @property
    def n_vars(self) -> int:
        return self._n

    def add_vars(self, name: str, shape, lb=0.0, ub=np.inf, vtype: str = CONTINUOUS) -> np.ndarray:
        if name in self.blocks:
            raise ValueError(f"duplicate variable block {name!r}")
        shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
        size = int(np.prod(shape)) if shape else 1
        idx = np.arange(self._n, self._n + size, dtype=np.int64).reshape(shape)
        self._n += size
        self._lb.append(np.broadcast_to(np.asarray(lb, dtype=float), shape).reshape(-1).copy())
        self._ub.append(np.broadcast_to(np.asarray(ub, dtype=float), shape).reshape(-1).copy())
        self._vt.append(np.full(size, vtype, dtype="<U1"))
        self.blocks[name] = idx
        return idx

    def add_rows(self, tag: str, terms: Sequence[tuple], sense: str, rhs=0.0, shape=None) -> np.ndarray:
        """Add a family of rows.

        Each term is ``(idx, coef)``; ``idx`` has the row shape, optionally
        followed by one trailing axis of summed columns, and ``coef``
        broadcasts against ``idx``.
        """
        if shape is None:
            first = np.asarray(terms[0][0])
            shape = first.shape
        shape = tuple(shape)
        n_rows = int(np.prod(shape)) if shape else 1
        row_ids = np.arange(self._m, self._m + n_rows, dtype=np.int64).reshape(shape)
        for idx, coef in terms:
            idx = np.asarray(idx, dtype=np.int64)
            if idx.shape == shape:
                idx = idx[..., None]
            if idx.shape[: len(shape)] != shape or idx.ndim != len(shape) + 1:
                raise ValueError(f"{tag}: term shape {idx.shape} does not match rows {shape}")
            coef = np.asarray(coef, dtype=float)
            if coef.ndim == len(shape) and coef.shape == shape:
                coef = coef[..., None]
            coef = np.broadcast_to(coef, idx.shape)
            r = np.broadcast_to(row_ids[..., None], idx.shape)
            self._rows.append(r.reshape(-1))
            self._cols.append(idx.reshape(-1))
            self._vals.append(coef.reshape(-1))
        self._sense.append(np.full(n_rows, sense, dtype="<U2"))
        self._rhs.append(np.broadcast_to(np.asarray(rhs, dtype=float), shape).reshape(-1).copy())
        self._tags.append(np.full(n_rows, tag, dtype=object))
        self._m += n_rows
        return row_ids

    def add_objective(self, idx, coef) -> None:
        idx = np.asarray(idx, dtype=np.int64)
        coef = np.broadcast_to(np.asarray(coef, dtype=float), idx.shape)
        self._obj_idx.append(idx.reshape(-1))
        self._obj_val.append(coef.reshape(-1))

    def add_expr_objective(self, expr: LinExpr, weight: float = 1.0) -> None:
        self.add_objective(expr.idx, expr.coef * weight)
        self.c0 += expr.const * weight

    def build(self) -> MilpProblem:
        def cat(parts, dtype=float):
            return np.concatenate(parts) if parts else np.array([], dtype=dtype)

        n = self._n
        A = sparse.csr_matrix(
            (cat(self._vals), (cat(self._rows, np.int64), cat(self._cols, np.int64))),
            shape=(self._m, n),
        )
        A.sum_duplicates()
        c = np.zeros(n)
        if self._obj_idx:
            np.add.at(c, cat(self._obj_idx, np.int64), cat(self._obj_val))
        prob = MilpProblem(
            lb=cat(self._lb),
            ub=cat(self._ub),
            vtype=cat(self._vt, "<U1"),
            A=A,
            sense=cat(self._sense, "<U2"),
            rhs=cat(self._rhs),
            c=c,
            c0=self.c0,
            row_tags=cat(self._tags, object),
            blocks=dict(self.blocks),
        )
        prob.check()
        return prob


def sum_exprs(exprs: Iterable[LinExpr]) -> LinExpr:
    out = LinExpr(np.array([], dtype=np.int64), np.array([]))
    for e in exprs:
        out = out + e
    return out
