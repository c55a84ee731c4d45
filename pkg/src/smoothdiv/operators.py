"""Dense Hermitian operators, states, channels and the JSON operator format.

Everything here works on plain ``numpy`` arrays; the small wrapper classes
only add validation and implement ``__array__`` so they can be passed
anywhere an array is expected.

Tensor products use the A-major convention: in ``kron(a, b)`` the index of
system A varies slowest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import (
    BadFactorization,
    DimensionMismatch,
    DomainError,
    NotHermitian,
    NotPSD,
    ParseError,
    TraceViolation,
)

# eigenvalues below this are treated as exact zeros by spectral functions
CLIP = 1e-12
HERMITIAN_TOL = 1e-8
PSD_TOL = 1e-8
TRACE_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a square complex ndarray (no validation beyond shape)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def herm(a) -> np.ndarray:
    m = as_matrix(a)
    return (m + m.conj().T) / 2


def _readonly(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if asym > HERMITIAN_TOL:
            raise NotHermitian(f"matrix deviates from its adjoint by {asym:.3g}")
        object.__setattr__(self, "matrix", _readonly((m + m.conj().T) / 2))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self):
        return np.linalg.eigh(self.matrix)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class DensityOperator:
    """A state (``kind='normalized'``) or a subnormalized state."""

    matrix: np.ndarray
    kind: Literal["normalized", "subnormalized"] = "normalized"

    def __post_init__(self):
        op = HermitianOperator(self.matrix)
        w, v = op.eigh()
        if w.size and w[0] < -PSD_TOL:
            raise NotPSD(f"minimum eigenvalue {w[0]:.3g} is negative")
        m = op.matrix
        if w.size and w[0] < 0:
            w = np.clip(w, 0.0, None)
            m = (v * w) @ v.conj().T
        tr = float(np.real(np.trace(m)))
        if self.kind == "normalized":
            if abs(tr - 1.0) > TRACE_TOL:
                raise TraceViolation(f"trace {tr:.12g} != 1")
        elif self.kind == "subnormalized":
            if tr > 1.0 + TRACE_TOL:
                raise TraceViolation(f"trace {tr:.12g} > 1")
        else:
            raise DomainError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def make_density(matrix, kind="normalized") -> DensityOperator:
    return DensityOperator(as_matrix(matrix), kind)


@dataclass(frozen=True)
class BipartiteLabel:
    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise BadFactorization("subsystem dimensions must be positive")

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    def check(self, m: np.ndarray) -> None:
        if m.shape[0] != self.dim:
            raise BadFactorization(
                f"operator of dimension {m.shape[0]} does not factor as "
                f"{self.dim_a} x {self.dim_b}"
            )


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map in Kraus form; each Kraus operator has shape (dim_out, dim_in)."""

    kraus: tuple = field(default=())

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise DomainError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise DimensionMismatch("Kraus operators must share one shape")
        s = sum(k.conj().T @ k for k in ks)
        dev = np.max(np.abs(s - np.eye(shape[1])))
        if dev > 1e-10:
            raise DomainError(f"Kraus operators are not trace preserving (dev {dev:.3g})")
        for k in ks:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ks)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, a) -> np.ndarray:
        return apply_channel(self, a)


def apply_channel(channel: QuantumChannel, a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != channel.dim_in:
        raise DimensionMismatch(
            f"channel expects dimension {channel.dim_in}, got {m.shape[0]}"
        )
    out = sum(k @ m @ k.conj().T for k in channel.kraus)
    return (out + out.conj().T) / 2


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel((np.eye(dim),))


def replacer_channel(dim_in: int, omega) -> QuantumChannel:
    """N(X) = Tr[X] omega."""
    w, v = np.linalg.eigh(herm(omega))
    w = np.clip(w, 0.0, None)
    kraus = []
    for i in range(dim_in):
        for j, lam in enumerate(w):
            if lam <= CLIP:
                continue
            k = np.zeros((len(w), dim_in), dtype=complex)
            k[:, i] = np.sqrt(lam) * v[:, j]
            kraus.append(k)
    return QuantumChannel(tuple(kraus))


def dephasing_channel(dim: int) -> QuantumChannel:
    """Completely dephasing channel in the computational basis."""
    kraus = []
    for i in range(dim):
        k = np.zeros((dim, dim))
        k[i, i] = 1.0
        kraus.append(k)
    return QuantumChannel(tuple(kraus))


def partial_trace(a, label: BipartiteLabel, keep: Literal["A", "B"]) -> np.ndarray:
    m = as_matrix(a)
    label.check(m)
    t = m.reshape(label.dim_a, label.dim_b, label.dim_a, label.dim_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise BadFactorization(f"keep must be 'A' or 'B', not {keep!r}")


def kron(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, as_matrix(op))
    return out


def swap_operator(dim_a: int, dim_b: int) -> np.ndarray:
    """Unitary mapping A (x) B to B (x) A."""
    n = dim_a * dim_b
    s = np.zeros((n, n))
    for i in range(dim_a):
        for j in range(dim_b):
            s[j * dim_a + i, i * dim_b + j] = 1.0
    return s


def _eigh_psd(a, tol=PSD_TOL):
    w, v = np.linalg.eigh(herm(a))
    if w.size and w[0] < -tol:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3g} is negative")
    w = np.where(w < CLIP, 0.0, w)
    return w, v


def matrix_function(a, fn: str, power: float | None = None) -> np.ndarray:
    """Apply ``fn`` in the eigenbasis of the PSD operator ``a``.

    ``fn`` is ``'sqrt'``, ``'log2'`` (on the support, zero on the kernel) or
    ``'power'`` (requires ``power``; negative powers act on the support only).
    """
    w, v = _eigh_psd(a)
    supp = w > 0
    if fn == "sqrt":
        f = np.sqrt(w)
    elif fn == "log2":
        f = np.zeros_like(w)
        f[supp] = np.log2(w[supp])
    elif fn == "power":
        if power is None:
            raise DomainError("power requires an exponent")
        f = np.zeros_like(w)
        f[supp] = w[supp] ** power
    else:
        raise DomainError(f"unknown matrix function {fn!r}")
    return (v * f) @ v.conj().T


def support_projector(a) -> np.ndarray:
    w, v = _eigh_psd(a)
    vs = v[:, w > 0]
    return vs @ vs.conj().T


def is_psd(a, tol=PSD_TOL) -> bool:
    return bool(np.linalg.eigvalsh(herm(a))[0] >= -tol)


def fidelity(a, b) -> float:
    """F(A, B) = || sqrt(A) sqrt(B) ||_1^2 for PSD operators A and B."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes {ma.shape} and {mb.shape} differ")
    # singular values of sqrt(A) sqrt(B) avoid taking square roots of the
    # eigenvalues of sqrt(A) B sqrt(A), which turns 1e-18 of noise into 1e-9
    sv = np.linalg.svd(matrix_function(ma, "sqrt") @ matrix_function(mb, "sqrt"), compute_uv=False)
    return float(np.sum(sv) ** 2)


def root_fidelity(a, b) -> float:
    return float(np.sqrt(fidelity(a, b)))


# -- random instances -------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_state(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    rng = _rng(seed)
    g = _ginibre(rng, dim, rank or dim)
    m = g @ g.conj().T
    return herm(m / np.real(np.trace(m)))


def random_pure_state(dim: int, seed=None) -> np.ndarray:
    return random_state(dim, seed, rank=1)


def random_psd(dim: int, seed=None, scale: float | None = None) -> np.ndarray:
    """Random PSD operator; trace drawn uniformly from (0.2, 2) unless ``scale``."""
    rng = _rng(seed)
    s = rng.uniform(0.2, 2.0) if scale is None else scale
    return s * random_state(dim, rng)


def random_channel(dim_in: int, seed=None, kraus_rank: int = 2, dim_out=None) -> QuantumChannel:
    """Random channel from a Haar-like isometry, split into Kraus blocks."""
    rng = _rng(seed)
    dim_out = dim_out or dim_in
    g = _ginibre(rng, dim_out * kraus_rank, dim_in)
    iso, r = np.linalg.qr(g)
    iso = iso * (np.diag(r) / np.abs(np.diag(r)))
    kraus = tuple(iso[k * dim_out:(k + 1) * dim_out, :] for k in range(kraus_rank))
    return QuantumChannel(kraus)


def random_instance(seed, dim: int, kind: str = "state", kraus_rank: int = 2):
    """Deterministic random state, PSD operator or channel for ``seed``."""
    if dim < 1:
        raise DomainError("dim must be >= 1")
    if kind == "state":
        return make_density(random_state(dim, seed))
    if kind == "psd":
        return HermitianOperator(random_psd(dim, seed))
    if kind == "channel":
        return random_channel(dim, seed, kraus_rank=kraus_rank)
    raise DomainError(f"unknown kind {kind!r}")


# -- named states -----------------------------------------------------------


def maximally_entangled(d: int) -> np.ndarray:
    """Phi^d = |Phi><Phi| with |Phi> = sum_i |ii> / sqrt(d)."""
    v = np.zeros(d * d)
    for i in range(d):
        v[i * d + i] = 1.0
    v /= np.sqrt(d)
    return np.outer(v, v).astype(complex)


def max_classically_correlated(d: int) -> np.ndarray:
    """(1/d) sum_i |i><i| (x) |i><i|."""
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        m[i * d + i, i * d + i] = 1.0 / d
    return m


def basis_state(d: int, i: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[i, i] = 1.0
    return m


# -- JSON format ------------------------------------------------------------


def _parse_matrix(obj, where: str, dim=None) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError("expected an object with 're' (and optionally 'im')", where)
    if "re" not in obj:
        raise ParseError("missing field", f"{where}.re")
    try:
        re = np.array(obj["re"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"not a numeric matrix ({exc})", f"{where}.re") from None
    if re.ndim != 2:
        raise ParseError("must be a 2-d array", f"{where}.re")
    im = np.zeros_like(re)
    if obj.get("im") is not None:
        try:
            im = np.array(obj["im"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"not a numeric matrix ({exc})", f"{where}.im") from None
        if im.shape != re.shape:
            raise ParseError(f"shape {im.shape} differs from re {re.shape}", f"{where}.im")
    if dim is not None and re.shape != (dim, dim):
        raise ParseError(f"shape {re.shape} does not match dim {dim}", f"{where}.re")
    return re + 1j * im


def operator_from_json(obj, where: str = "operator") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", where)
    if "dim" not in obj:
        raise ParseError("missing field", f"{where}.dim")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError("must be a positive integer", f"{where}.dim")
    return _parse_matrix(obj, where, dim)


def operator_to_json(a) -> dict:
    m = as_matrix(a)
    return {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}


def channel_from_json(obj, where: str = "channel") -> QuantumChannel:
    if not isinstance(obj, dict) or "kraus" not in obj:
        raise ParseError("missing field", f"{where}.kraus")
    ks = obj["kraus"]
    if not isinstance(ks, list) or not ks:
        raise ParseError("must be a non-empty list", f"{where}.kraus")
    mats = []
    for i, k in enumerate(ks):
        m = _parse_matrix(k, f"{where}.kraus[{i}]")
        mats.append(m)
    return QuantumChannel(tuple(mats))


def channel_to_json(channel: QuantumChannel) -> dict:
    return {"kraus": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in channel.kraus]}


def _read_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(exc), str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc})", str(path)) from None


def load_operator(path) -> np.ndarray:
    return operator_from_json(_read_json(path), where=Path(path).name)


def save_operator(path, a) -> None:
    Path(path).write_text(json.dumps(operator_to_json(a)))


def load_channel(path) -> QuantumChannel:
    return channel_from_json(_read_json(path), where=Path(path).name)


def save_channel(path, channel: QuantumChannel) -> None:
    Path(path).write_text(json.dumps(channel_to_json(channel)))


def direct_sum(*ops: Sequence) -> np.ndarray:
    mats = [as_matrix(o) for o in ops]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out
