"""Exact sparse multivariate polynomial arithmetic with integer coefficients.

A polynomial is a dict mapping exponent tuples to (arbitrary-precision) int
coefficients.  Exponent tuples have a fixed arity given by a shared
:class:`VarTable`: one slot per named parameter plus one final slot reserved
for the differential indeterminate ``D`` (the operator variable of
characteristic polynomials).  Zero coefficients are never stored; the zero
polynomial is the empty dict.

All arithmetic is exact; no floating point appears anywhere in this module.
Polynomials built over different variable tables cannot be mixed
(:class:`VariableMismatch`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence


class VariableMismatch(ValueError):
    """Operands (or an evaluation point) disagree on the variable table."""


@dataclass(frozen=True)
class VarTable:
    """Fixed, ordered variable list; the final (implicit) slot is ``D``.

    ``params`` holds the named variables in their canonical order.  The
    exponent tuples of every polynomial over this table have arity
    ``len(params) + 1``, the last entry being the power of ``D``.
    """

    params: tuple[Hashable, ...]

    @property
    def arity(self) -> int:
        return len(self.params) + 1

    @property
    def d_slot(self) -> int:
        return len(self.params)

    def index_of(self, label: Hashable) -> int:
        try:
            return self.params.index(label)
        except ValueError:
            raise VariableMismatch(f"unknown variable {label!r}") from None


class SparsePoly:
    """Immutable sparse polynomial over a :class:`VarTable`."""

    __slots__ = ("table", "terms")

    def __init__(self, table: VarTable, terms: Mapping[tuple[int, ...], int]):
        self.table = table
        self.terms = {e: c for e, c in terms.items() if c != 0}

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(table: VarTable) -> "SparsePoly":
        return SparsePoly(table, {})

    @staticmethod
    def const(table: VarTable, value: int) -> "SparsePoly":
        if value == 0:
            return SparsePoly.zero(table)
        return SparsePoly(table, {(0,) * table.arity: value})

    @staticmethod
    def var(table: VarTable, label: Hashable) -> "SparsePoly":
        idx = table.index_of(label)
        exp = [0] * table.arity
        exp[idx] = 1
        return SparsePoly(table, {tuple(exp): 1})

    @staticmethod
    def d_var(table: VarTable) -> "SparsePoly":
        exp = [0] * table.arity
        exp[-1] = 1
        return SparsePoly(table, {tuple(exp): 1})

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {(0,) * self.table.arity: 1}

    def d_degree(self) -> int:
        """Degree in ``D``; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(e[-1] for e in self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.table == other.table and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- ring operations ----------------------------------------------

    def _check(self, other: "SparsePoly") -> None:
        if self.table is not other.table and self.table != other.table:
            raise VariableMismatch("polynomials built over different variable tables")

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        self._check(other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                del out[e]
        res = SparsePoly.__new__(SparsePoly)
        res.table = self.table
        res.terms = out
        return res

    def __neg__(self) -> "SparsePoly":
        res = SparsePoly.__new__(SparsePoly)
        res.table = self.table
        res.terms = {e: -c for e, c in self.terms.items()}
        return res

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other: "SparsePoly") -> "SparsePoly":
        self._check(other)
        if not self.terms or not other.terms:
            return SparsePoly.zero(self.table)
        out: dict[tuple[int, ...], int] = {}
        a_items = self.terms.items()
        b_items = list(other.terms.items())
        for ea, ca in a_items:
            for eb, cb in b_items:
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e, 0) + ca * cb
                if s:
                    out[e] = s
                elif e in out:
                    del out[e]
        res = SparsePoly.__new__(SparsePoly)
        res.table = self.table
        res.terms = out
        return res

    def scale(self, k: int) -> "SparsePoly":
        if k == 0:
            return SparsePoly.zero(self.table)
        res = SparsePoly.__new__(SparsePoly)
        res.table = self.table
        res.terms = {e: k * c for e, c in self.terms.items()}
        return res

    def partial(self, label: Hashable) -> "SparsePoly":
        """Termwise partial derivative with respect to a named variable."""
        idx = self.table.index_of(label)
        out: dict[tuple[int, ...], int] = {}
        for e, c in self.terms.items():
            k = e[idx]
            if k == 0:
                continue
            de = list(e)
            de[idx] = k - 1
            key = tuple(de)
            s = out.get(key, 0) + c * k
            if s:
                out[key] = s
            elif key in out:
                del out[key]
        return SparsePoly(self.table, out)

    def partial_by_index(self, idx: int) -> "SparsePoly":
        out: dict[tuple[int, ...], int] = {}
        for e, c in self.terms.items():
            k = e[idx]
            if k == 0:
                continue
            de = list(e)
            de[idx] = k - 1
            out[tuple(de)] = out.get(tuple(de), 0) + c * k
        return SparsePoly(self.table, {e: c for e, c in out.items() if c})

    # -- D handling -----------------------------------------------------

    def d_coefficient(self, power: int) -> "SparsePoly":
        """The coefficient of ``D**power`` as a D-free polynomial."""
        out: dict[tuple[int, ...], int] = {}
        for e, c in self.terms.items():
            if e[-1] == power:
                out[e[:-1] + (0,)] = c
        return SparsePoly(self.table, out)

    # -- evaluation -----------------------------------------------------

    def evaluate(self, point: "EvalPoint") -> int:
        """Exact evaluation at integer parameter values (modular when set).

        The point assigns every named parameter; ``D`` has no assignment, so
        evaluating a polynomial that still contains ``D`` is an error.
        """
        if point.table != self.table:
            raise VariableMismatch("evaluation point built over a different variable table")
        mod = point.modulus
        total = 0
        vals = point.values
        for e, c in self.terms.items():
            if e[-1]:
                raise VariableMismatch("cannot evaluate a polynomial containing D")
            term = c
            for idx, k in enumerate(e[:-1]):
                if k:
                    term *= pow(vals[idx], k, mod) if mod else vals[idx] ** k
            total += term
            if mod:
                total %= mod
        return total % mod if mod else total

    # -- rendering ------------------------------------------------------

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms in graded-lexicographic order (highest first), for stable output."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts: list[str] = []
        for e, c in self.sorted_terms():
            factors = []
            for idx, k in enumerate(e[:-1]):
                if k == 0:
                    continue
                name = str(self.table.params[idx])
                factors.append(name if k == 1 else f"{name}^{k}")
            if e[-1]:
                factors.append("D" if e[-1] == 1 else f"D^{e[-1]}")
            body = "*".join(factors)
            mag = abs(c)
            if not body:
                chunk = str(mag)
            elif mag == 1:
                chunk = body
            else:
                chunk = f"{mag}*{body}"
            parts.append(("- " if c < 0 else "+ ") + chunk)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"SparsePoly({self})"


@dataclass(frozen=True)
class EvalPoint:
    """Integer assignment for every named parameter, with optional prime modulus."""

    table: VarTable
    values: tuple[int, ...]
    modulus: int | None = None

    def __post_init__(self) -> None:
        if len(self.values) != len(self.table.params):
            raise VariableMismatch(
                f"point assigns {len(self.values)} values for {len(self.table.params)} parameters"
            )


# -- symbolic determinants ---------------------------------------------


def determinant(rows: Sequence[Sequence[SparsePoly]], table: VarTable) -> SparsePoly:
    """Determinant of a square matrix of polynomials.

    Cofactor expansion memoized on the set of still-available columns: the
    value for column set S only depends on S (the rows used are always the
    first ``len(S)``), which turns the n! expansion into 2^n subset states.
    Entry sparsity (many structural zeros) prunes most branches.
    """
    dim = len(rows)
    if dim == 0:
        return SparsePoly.const(table, 1)
    for r in rows:
        if len(r) != dim:
            raise ValueError("determinant requires a square matrix")
    full = (1 << dim) - 1
    memo: dict[int, SparsePoly] = {}

    def minor(colmask: int) -> SparsePoly:
        cached = memo.get(colmask)
        if cached is not None:
            return cached
        k = colmask.bit_count()
        row = rows[dim - k]  # rows are consumed top-down
        acc = SparsePoly.zero(table)
        sign = 1
        rest = colmask
        while rest:
            low = rest & (-rest)
            col = low.bit_length() - 1
            entry = row[col]
            if entry.terms:
                sub = minor(colmask ^ low) if k > 1 else SparsePoly.const(table, 1)
                contrib = entry * sub
                acc = acc + (contrib if sign > 0 else -contrib)
            sign = -sign
            rest ^= low
        memo[colmask] = acc
        return acc

    return minor(full)


def char_matrix(entries: Sequence[Sequence[SparsePoly]], table: VarTable) -> list[list[SparsePoly]]:
    """Rows of ``D*I - M`` for a square polynomial matrix ``M``."""
    dim = len(entries)
    d = SparsePoly.d_var(table)
    out = []
    for i in range(dim):
        row = []
        for j in range(dim):
            row.append(d - entries[i][j] if i == j else -entries[i][j])
        out.append(row)
    return out


def char_poly_coeffs(entries: Sequence[Sequence[SparsePoly]], table: VarTable) -> list[SparsePoly]:
    """Coefficients of ``det(D*I - M)`` for ``D**(n-1) .. D**0``.

    The leading ``D**n`` coefficient is 1 (monic) and is not returned.
    """
    dim = len(entries)
    det = determinant(char_matrix(entries, table), table)
    lead = det.d_coefficient(dim)
    if not lead.is_one():
        raise AssertionError("characteristic polynomial is not monic")
    return [det.d_coefficient(p) for p in range(dim - 1, -1, -1)]


def signed_minor_coeffs(
    entries: Sequence[Sequence[SparsePoly]], table: VarTable, i: int, j: int
) -> list[SparsePoly]:
    """Coefficients in D of ``(-1)**(i+j) * det((D*I - M) minus row i, col j)``.

    ``i`` and ``j`` are 1-based positions.  Returned for ``D**(n-2) .. D**0``
    (n = dim of M); the ``D**(n-1)`` coefficient is 1 when i == j and 0
    otherwise, and is not returned.
    """
    dim = len(entries)
    if not (1 <= i <= dim and 1 <= j <= dim):
        raise ValueError(f"minor position ({i},{j}) out of range for dim {dim}")
    cm = char_matrix(entries, table)
    sub = [[cm[r][c] for c in range(dim) if c != j - 1] for r in range(dim) if r != i - 1]
    det = determinant(sub, table)
    if (i + j) % 2:
        det = -det
    head = det.d_coefficient(dim - 1)
    expect_one = i == j
    if expect_one and not head.is_one():
        raise AssertionError("principal minor is not monic")
    if not expect_one and head.terms:
        raise AssertionError("off-diagonal minor has unexpected leading D coefficient")
    return [det.d_coefficient(p) for p in range(dim - 2, -1, -1)]
