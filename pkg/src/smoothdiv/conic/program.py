"""Small modeling layer for semidefinite programs over complex matrices.

An :class:`Affine` is a matrix-valued affine function of the real parameters
of the program's variables.  Each term stores a tensor of shape
``(rows * cols, k)`` mapping the ``k`` real parameters of one variable to the
row-major flattened entries of the expression.  That is enough to support
the handful of operations the quantities in this package need: sums,
products with constant matrices, adjoints, traces, partial traces, Kronecker
products with constants and block matrices.

A :class:`Program` collects variables, linear matrix inequalities and scalar
constraints.  :meth:`Program.compile` turns it into the standard form

    minimize  q.x   subject to   A x + s = b,   s in K

with ``K`` a product of zero, nonnegative and real PSD cones.  Complex LMIs
are embedded as ``M -> [[Re M, -Im M], [Im M, Re M]]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..errors import ModelError

_HERM_TOL = 1e-9


class Affine:
    __slots__ = ("shape", "const", "terms")
    __array_priority__ = 100  # make ndarray @ Affine defer to __rmatmul__

    def __init__(self, shape, const=None, terms=None):
        self.shape = tuple(shape)
        r, c = self.shape
        self.const = np.zeros((r, c), dtype=complex) if const is None else np.asarray(const, dtype=complex)
        if self.const.shape != self.shape:
            raise ModelError(f"constant of shape {self.const.shape} for expression {self.shape}")
        self.terms = dict(terms or {})

    # -- construction helpers -------------------------------------------

    @staticmethod
    def lift(x, shape=None) -> "Affine":
        if isinstance(x, Affine):
            return x
        if np.isscalar(x):
            if shape is None:
                shape = (1, 1)
            if x == 0:
                return Affine(shape)
            if shape[0] != shape[1]:
                raise ModelError("a nonzero scalar only lifts to a square block")
            return Affine(shape, x * np.eye(shape[0]))
        m = np.asarray(x, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2:
            raise ModelError(f"cannot lift array with {m.ndim} dims")
        return Affine(m.shape, m)

    def _map(self, fn, shape) -> "Affine":
        """Apply the linear map ``fn`` (acting on (r, c, ...) arrays) to const and terms."""
        r, c = self.shape
        const = fn(self.const)
        terms = {}
        for name, t in self.terms.items():
            k = t.shape[1]
            out = fn(t.reshape(r, c, k))
            terms[name] = out.reshape(shape[0] * shape[1], k)
        return Affine(shape, const, terms)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        other = Affine.lift(other, self.shape)
        if other.shape != self.shape:
            raise ModelError(f"shape mismatch {self.shape} + {other.shape}")
        terms = dict(self.terms)
        for name, t in other.terms.items():
            terms[name] = terms[name] + t if name in terms else t
        return Affine(self.shape, self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self):
        return Affine(self.shape, -self.const, {k: -t for k, t in self.terms.items()})

    def __sub__(self, other):
        return self + (-Affine.lift(other, self.shape))

    def __rsub__(self, other):
        return Affine.lift(other, self.shape) - self

    def __mul__(self, a):
        if not isinstance(a, Affine) and not np.isscalar(a) and self.shape == (1, 1):
            m = np.asarray(a)
            if m.ndim == 2:  # scalar expression times a constant matrix
                return kron(self, m)
        if isinstance(a, Affine) or not np.isscalar(a):
            raise ModelError("only scalar multiplication is affine")
        return Affine(self.shape, a * self.const, {k: a * t for k, t in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, a):
        return self * (1.0 / a)

    def __matmul__(self, m):
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != self.shape[1]:
            raise ModelError(f"cannot multiply {self.shape} by {m.shape}")
        return self._map(lambda a: np.einsum("ij...,jk->ik...", a, m), (self.shape[0], m.shape[1]))

    def __rmatmul__(self, m):
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[1] != self.shape[0]:
            raise ModelError(f"cannot multiply {m.shape} by {self.shape}")
        return self._map(lambda a: np.einsum("ij,jk...->ik...", m, a), (m.shape[0], self.shape[1]))

    @property
    def H(self) -> "Affine":
        r, c = self.shape
        return self._map(lambda a: np.conj(np.swapaxes(a, 0, 1)), (c, r))

    def trace(self) -> "Affine":
        r, c = self.shape
        if r != c:
            raise ModelError("trace of a non-square expression")
        return self._map(lambda a: np.trace(a, axis1=0, axis2=1)[None, None, ...], (1, 1))

    def __getitem__(self, idx):
        """Sub-block selection ``expr[r0:r1, c0:c1]`` (slices only)."""
        rs, cs = idx
        rows = range(self.shape[0])[rs]
        cols = range(self.shape[1])[cs]
        return self._map(lambda a: a[rs, cs], (len(rows), len(cols)))

    # -- structure ------------------------------------------------------

    def is_scalar(self) -> bool:
        return self.shape == (1, 1)

    def hermitian_defect(self) -> float:
        r, c = self.shape
        if r != c:
            return np.inf
        d = float(np.max(np.abs(self.const - self.const.conj().T), initial=0.0))
        for t in self.terms.values():
            a = t.reshape(r, c, -1)
            d = max(d, float(np.max(np.abs(a - np.conj(np.swapaxes(a, 0, 1))), initial=0.0)))
        return d

    def evaluate(self, values: dict) -> np.ndarray:
        """Numeric value given the real parameter vector of each variable."""
        out = self.const.reshape(-1).copy()
        for name, t in self.terms.items():
            out = out + t @ values[name]
        return out.reshape(self.shape)


def kron(a, b) -> Affine:
    """Kronecker product where at most one factor is an expression."""
    if isinstance(a, Affine) and isinstance(b, Affine):
        raise ModelError("kron of two expressions is not affine")
    if isinstance(b, Affine):
        c = np.asarray(a, dtype=complex)
        p, q = c.shape
        r, s = b.shape
        return b._map(
            lambda x: np.einsum("ij,ab...->iajb...", c, x).reshape((p * r, q * s) + x.shape[2:]),
            (p * r, q * s),
        )
    if isinstance(a, Affine):
        c = np.asarray(b, dtype=complex)
        p, q = c.shape
        r, s = a.shape
        return a._map(
            lambda x: np.einsum("ab...,ij->aibj...", x, c).reshape((r * p, s * q) + x.shape[2:]),
            (r * p, s * q),
        )
    return Affine.lift(np.kron(a, b))


def partial_trace(x: Affine, dim_a: int, dim_b: int, keep: str) -> Affine:
    """Partial trace of a square expression on A (x) B (A-major)."""
    if x.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ModelError(f"shape {x.shape} does not factor as {dim_a} x {dim_b}")

    def fn(m):
        rest = m.shape[2:]
        t = m.reshape((dim_a, dim_b, dim_a, dim_b) + rest)
        if keep == "A":
            return np.einsum("ijkj...->ik...", t)
        return np.einsum("ijil...->jl...", t)

    d = dim_a if keep == "A" else dim_b
    return x._map(fn, (d, d))


def bmat(blocks) -> Affine:
    """Assemble a block matrix; entries may be expressions, arrays, 0 or None."""
    nr, nc = len(blocks), len(blocks[0])
    heights = [None] * nr
    widths = [None] * nc
    for i, row in enumerate(blocks):
        if len(row) != nc:
            raise ModelError("ragged block matrix")
        for j, blk in enumerate(row):
            if blk is None or (np.isscalar(blk) and blk == 0):
                continue
            shape = blk.shape if isinstance(blk, Affine) else np.shape(blk)
            for store, idx, val in ((heights, i, shape[0]), (widths, j, shape[1])):
                if store[idx] is not None and store[idx] != val:
                    raise ModelError("inconsistent block sizes")
                store[idx] = val
    if None in heights or None in widths:
        raise ModelError("every block row and column needs one sized entry")
    shape = (sum(heights), sum(widths))
    const = np.zeros(shape, dtype=complex)
    terms: dict = {}
    r0 = 0
    for i, row in enumerate(blocks):
        c0 = 0
        for j, blk in enumerate(row):
            h, w = heights[i], widths[j]
            if blk is not None and not (np.isscalar(blk) and blk == 0):
                e = Affine.lift(blk, (h, w))
                const[r0:r0 + h, c0:c0 + w] = e.const
                for name, t in e.terms.items():
                    k = t.shape[1]
                    if name not in terms:
                        terms[name] = np.zeros(shape + (k,), dtype=complex)
                    terms[name][r0:r0 + h, c0:c0 + w, :] += t.reshape(h, w, k)
            c0 += w
        r0 += h
    flat = {n: t.reshape(shape[0] * shape[1], -1) for n, t in terms.items()}
    return Affine(shape, const, flat)


# -- variable parameterizations -------------------------------------------


@lru_cache(maxsize=64)
def hermitian_basis(n: int) -> np.ndarray:
    """Real basis of n x n Hermitian matrices as a (n*n, n*n) tensor."""
    cols = []
    for j in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[j, j] = 1.0
        cols.append(e)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = e[k, j] = 1.0
            cols.append(e)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1j
            e[k, j] = -1j
            cols.append(e)
    t = np.stack([c.reshape(-1) for c in cols], axis=1)
    t.setflags(write=False)
    return t


@lru_cache(maxsize=64)
def general_basis(r: int, c: int) -> np.ndarray:
    eye = np.eye(r * c)
    t = np.concatenate([eye, 1j * eye], axis=1).astype(complex)
    t.setflags(write=False)
    return t


@lru_cache(maxsize=64)
def svec_indices(n: int):
    """Upper-triangle, column-major index order and scale for real PSD cones."""
    rows, cols = [], []
    for j in range(n):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    rows = np.array(rows)
    cols = np.array(cols)
    scale = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return rows, cols, scale


def svec(m: np.ndarray) -> np.ndarray:
    """svec of a symmetric matrix (leading two axes), trailing axes kept."""
    rows, cols, scale = svec_indices(m.shape[0])
    return m[rows, cols, ...] * scale.reshape((-1,) + (1,) * (m.ndim - 2))


def smat(v: np.ndarray, n: int) -> np.ndarray:
    rows, cols, scale = svec_indices(n)
    m = np.zeros((n, n))
    m[rows, cols] = v / scale
    m[cols, rows] = v / scale
    return m


def embed(m: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a complex (n, n, ...) array."""
    re, im = np.real(m), np.imag(m)
    top = np.concatenate([re, -im], axis=1)
    bottom = np.concatenate([im, re], axis=1)
    return np.concatenate([top, bottom], axis=0)


def unembed_dual(z: np.ndarray) -> np.ndarray:
    """Complex Hermitian Z_c with <Z, embed(M)> = 2 Re Tr[Z_c M]."""
    n = z.shape[0] // 2
    z11, z12 = z[:n, :n], z[:n, n:]
    z21, z22 = z[n:, :n], z[n:, n:]
    zc = ((z11 + z22) + 1j * (z21 - z12)) / 2
    return (zc + zc.conj().T) / 2


# -- programs ----------------------------------------------------------------


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # 'hermitian' | 'matrix' | 'scalar'
    shape: tuple
    size: int
    basis: np.ndarray


@dataclass(frozen=True)
class Compiled:
    """Standard form  min q.x + q0  s.t.  A x + s = b,  s in cones."""

    q: np.ndarray
    q0: float
    A: sp.csc_matrix
    b: np.ndarray
    cones: tuple  # (('zero', n) | ('nonneg', n) | ('psd', dim)), in row order
    sign: float  # +1 for minimize, -1 for maximize
    offsets: dict  # variable name -> (start, stop)
    lmi_rows: tuple  # (label, start, stop, complex dim) per LMI


class Program:
    """Mutable builder; :meth:`compile` produces the immutable standard form."""

    def __init__(self, name: str = "program"):
        self.name = name
        self.variables: dict[str, Variable] = {}
        self.lmis: list[tuple[str, Affine]] = []
        self.equalities: list[tuple[str, Affine]] = []  # Re(expr) == 0
        self.inequalities: list[tuple[str, Affine]] = []  # Re(expr) >= 0
        self.objective: Affine | None = None
        self.sense = "min"

    # -- variables --------------------------------------------------------

    def _add(self, name, kind, shape, basis) -> Affine:
        if name in self.variables:
            raise ModelError(f"duplicate variable {name!r}")
        v = Variable(name, kind, shape, basis.shape[1], basis)
        self.variables[name] = v
        return Affine(shape, None, {name: basis})

    def hermitian(self, name: str, n: int) -> Affine:
        return self._add(name, "hermitian", (n, n), hermitian_basis(n))

    def matrix(self, name: str, rows: int, cols: int) -> Affine:
        return self._add(name, "matrix", (rows, cols), general_basis(rows, cols))

    def scalar(self, name: str) -> Affine:
        return self._add(name, "scalar", (1, 1), np.ones((1, 1), dtype=complex))

    # -- constraints ------------------------------------------------------

    def _check_vars(self, e: Affine):
        for name in e.terms:
            if name not in self.variables:
                raise ModelError(f"expression uses unknown variable {name!r}")

    def psd(self, expr: Affine, label: str | None = None):
        expr = Affine.lift(expr)
        self._check_vars(expr)
        if expr.shape[0] != expr.shape[1]:
            raise ModelError(f"LMI block must be square, got {expr.shape}")
        if expr.hermitian_defect() > _HERM_TOL:
            raise ModelError(f"LMI {label or len(self.lmis)} is not Hermitian")
        self.lmis.append((label or f"lmi{len(self.lmis)}", expr))

    def _scalar(self, lhs, rhs) -> Affine:
        e = Affine.lift(lhs) - Affine.lift(rhs)
        if not e.is_scalar():
            raise ModelError(f"scalar constraint has shape {e.shape}")
        self._check_vars(e)
        return e

    def eq(self, lhs, rhs, label: str | None = None):
        self.equalities.append((label or f"eq{len(self.equalities)}", self._scalar(lhs, rhs)))

    def ge(self, lhs, rhs, label: str | None = None):
        self.inequalities.append((label or f"ge{len(self.inequalities)}", self._scalar(lhs, rhs)))

    def le(self, lhs, rhs, label: str | None = None):
        self.ge(rhs, lhs, label)

    def minimize(self, expr):
        self._objective(expr, "min")

    def maximize(self, expr):
        self._objective(expr, "max")

    def _objective(self, expr, sense):
        e = Affine.lift(expr)
        if not e.is_scalar():
            raise ModelError("objective must be scalar")
        self._check_vars(e)
        self.objective = e
        self.sense = sense

    # -- compilation -------------------------------------------------------

    def _columns(self, e: Affine, offsets, n) -> np.ndarray:
        """Dense complex coefficient matrix (entries, n) of an expression."""
        out = np.zeros((e.shape[0] * e.shape[1], n), dtype=complex)
        for name, t in e.terms.items():
            a, b = offsets[name]
            out[:, a:b] += t
        return out

    def compile(self) -> Compiled:
        offsets = {}
        n = 0
        for v in self.variables.values():
            offsets[v.name] = (n, n + v.size)
            n += v.size
        if n == 0:
            raise ModelError("program has no variables")

        rows_a, rows_b, cones = [], [], []
        if self.equalities:
            for _, e in self.equalities:
                rows_a.append(np.real(self._columns(e, offsets, n)))
                rows_b.append(-np.real(e.const).reshape(1))
            cones.append(("zero", len(self.equalities)))
        if self.inequalities:
            for _, e in self.inequalities:
                rows_a.append(-np.real(self._columns(e, offsets, n)))
                rows_b.append(np.real(e.const).reshape(1))
            cones.append(("nonneg", len(self.inequalities)))

        lmi_rows = []
        row = sum(len(b) for b in rows_b)
        for label, e in self.lmis:
            m = e.shape[0]
            cols = self._columns(e, offsets, n).reshape(m, m, n)
            sv_a = svec(embed(cols))
            sv_b = svec(embed(e.const))
            rows_a.append(-sv_a)
            rows_b.append(sv_b)
            cones.append(("psd", 2 * m))
            lmi_rows.append((label, row, row + len(sv_b), m))
            row += len(sv_b)

        if not rows_a:
            raise ModelError("program has no constraints")
        a = sp.csc_matrix(np.vstack(rows_a))
        a.eliminate_zeros()
        b = np.concatenate(rows_b)

        obj = self.objective if self.objective is not None else Affine((1, 1))
        sign = 1.0 if self.sense == "min" else -1.0
        q = sign * np.real(self._columns(obj, offsets, n)).reshape(-1)
        q0 = sign * float(np.real(obj.const[0, 0]))
        return Compiled(q, q0, a, b, tuple(cones), sign, offsets, tuple(lmi_rows))

    def values(self, x: np.ndarray, compiled: Compiled) -> dict:
        return {name: x[a:b] for name, (a, b) in compiled.offsets.items()}

    def to_json(self) -> str:
        """Self-describing dump of the compiled program (for reproducibility)."""
        c = self.compile()
        coo = c.A.tocoo()
        doc = {
            "name": self.name,
            "sense": self.sense,
            "variables": [
                {"name": v.name, "kind": v.kind, "shape": list(v.shape),
                 "columns": list(c.offsets[v.name])}
                for v in self.variables.values()
            ],
            "cones": [list(k) for k in c.cones],
            "lmis": [{"label": l, "rows": [a, b], "dim": m} for l, a, b, m in c.lmi_rows],
            "q": c.q.tolist(),
            "q0": c.q0,
            "b": c.b.tolist(),
            "A": {"shape": list(c.A.shape),
                  "triplets": [[int(i), int(j), float(v)] for i, j, v in zip(coo.row, coo.col, coo.data)]},
        }
        return json.dumps(doc)
