"""Dense complex matrix arithmetic for tuples of self-adjoint and unitary matrices.

All values are immutable after construction (backing arrays are marked
read-only) and all operations are pure functions, so everything here is safe
to share across worker processes.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

# Input may deviate from exact self-adjointness by at most this much before
# symmetrization; larger deviations are treated as caller bugs.
HERMITIAN_INPUT_TOL = 1e-8
# Max-entry deviation of U U* from the identity accepted at construction.
UNITARY_DEFECT_TOL = 1e-9

__all__ = [
    "HermitianMatrix",
    "UnitaryMatrix",
    "HermitianTuple",
    "UnitaryTuple",
    "op_norm",
    "p_norm",
    "trace_n",
    "truncate_spectrum",
    "conjugate_tuple",
    "d2_distance",
    "matrix_to_json",
    "matrix_from_json",
]


def _as_square_array(entries) -> np.ndarray:
    mat = np.asarray(entries, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
        raise InvalidInputError(f"expected a nonempty square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InvalidInputError("matrix entries must be finite")
    return mat


class HermitianMatrix:
    """An N x N self-adjoint matrix.

    The constructor symmetrizes the input to (A + A*)/2 to absorb
    floating-point drift; inputs further than ``HERMITIAN_INPUT_TOL`` from
    self-adjoint are rejected.
    """

    __slots__ = ("mat",)

    def __init__(self, entries):
        mat = _as_square_array(entries)
        defect = float(np.max(np.abs(mat - mat.conj().T)))
        if defect > HERMITIAN_INPUT_TOL:
            raise InvalidInputError(
                f"input is {defect:.3e} away from self-adjoint (tolerance {HERMITIAN_INPUT_TOL:g})"
            )
        sym = (mat + mat.conj().T) / 2.0
        sym.flags.writeable = False
        self.mat = sym

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def __repr__(self):
        return f"HermitianMatrix(n={self.n})"


class UnitaryMatrix:
    """An N x N unitary matrix; U U* must equal the identity entrywise
    within ``UNITARY_DEFECT_TOL``."""

    __slots__ = ("mat",)

    def __init__(self, entries):
        mat = _as_square_array(entries)
        defect = float(np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0]))))
        if defect > UNITARY_DEFECT_TOL:
            raise InvalidInputError(
                f"unitarity defect {defect:.3e} exceeds tolerance {UNITARY_DEFECT_TOL:g}"
            )
        mat = mat.copy()
        mat.flags.writeable = False
        self.mat = mat

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    def adjoint(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.mat.conj().T)

    def __repr__(self):
        return f"UnitaryMatrix(n={self.n})"


class HermitianTuple:
    """An ordered tuple of self-adjoint matrices sharing one size N."""

    __slots__ = ("matrices",)

    def __init__(self, matrices: Sequence[HermitianMatrix]):
        mats = tuple(matrices)
        if not mats:
            raise InvalidInputError("a Hermitian tuple needs at least one matrix")
        if any(not isinstance(a, HermitianMatrix) for a in mats):
            raise InvalidInputError("all members must be HermitianMatrix instances")
        sizes = {a.n for a in mats}
        if len(sizes) != 1:
            raise InvalidInputError(f"matrices must share one size, got {sorted(sizes)}")
        self.matrices = mats

    @property
    def n(self) -> int:
        return self.matrices[0].n

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, j):
        return self.matrices[j]

    def arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(a.mat for a in self.matrices)

    def __repr__(self):
        return f"HermitianTuple(n={self.n}, r={len(self)})"


class UnitaryTuple:
    """An ordered tuple of unitary matrices sharing one size N."""

    __slots__ = ("unitaries",)

    def __init__(self, unitaries: Sequence[UnitaryMatrix]):
        mats = tuple(unitaries)
        if not mats:
            raise InvalidInputError("a unitary tuple needs at least one matrix")
        if any(not isinstance(u, UnitaryMatrix) for u in mats):
            raise InvalidInputError("all members must be UnitaryMatrix instances")
        sizes = {u.n for u in mats}
        if len(sizes) != 1:
            raise InvalidInputError(f"unitaries must share one size, got {sorted(sizes)}")
        self.unitaries = mats

    @property
    def n(self) -> int:
        return self.unitaries[0].n

    def __len__(self):
        return len(self.unitaries)

    def __iter__(self):
        return iter(self.unitaries)

    def __getitem__(self, i):
        return self.unitaries[i]

    def arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(u.mat for u in self.unitaries)

    def __repr__(self):
        return f"UnitaryTuple(n={self.n}, count={len(self)})"


def _unwrap(a) -> np.ndarray:
    if isinstance(a, (HermitianMatrix, UnitaryMatrix)):
        return a.mat
    return _as_square_array(a)


def trace_n(mat) -> complex:
    """Normalized trace tr_N = Tr/N, so trace_n(I) = 1."""
    m = _unwrap(mat)
    return complex(np.trace(m)) / m.shape[0]


def op_norm(a) -> float:
    """Largest singular value (the spectral radius for self-adjoint input)."""
    mat = _unwrap(a)
    if isinstance(a, HermitianMatrix):
        return float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    return float(np.linalg.norm(mat, 2))


def p_norm(a, p: float) -> float:
    """(tr_N |A|^p)^(1/p) with the normalized trace; requires p >= 1."""
    if p < 1:
        raise InvalidInputError(f"p-norm requires p >= 1, got {p}")
    mat = _unwrap(a)
    if isinstance(a, HermitianMatrix):
        s = np.abs(np.linalg.eigvalsh(mat))
    else:
        s = np.linalg.svd(mat, compute_uv=False)
    return float(np.mean(s**p) ** (1.0 / p))


def truncate_spectrum(a: HermitianMatrix, radius: float) -> HermitianMatrix:
    """Clamp the spectrum of a self-adjoint matrix into [-radius, radius].

    Eigenvectors are preserved: the result is V f(D) V* for the
    eigendecomposition A = V D V*, where f clamps each eigenvalue.
    """
    if not isinstance(a, HermitianMatrix):
        a = HermitianMatrix(a)
    if not radius > 0:
        raise InvalidInputError(f"cut-off radius must be positive, got {radius}")
    if not math.isfinite(radius):
        return a
    vals, vecs = np.linalg.eigh(a.mat)
    if np.all(np.abs(vals) <= radius):
        return a
    clamped = np.clip(vals, -radius, radius)
    return HermitianMatrix((vecs * clamped) @ vecs.conj().T)


def conjugate_tuple(u: UnitaryMatrix, a: HermitianTuple) -> HermitianTuple:
    """Conjugate every member of the tuple by one unitary: (U A_j U*)_j."""
    if u.n != a.n:
        raise InvalidInputError(f"size mismatch: unitary is {u.n}x{u.n}, tuple is size {a.n}")
    um = u.mat
    uh = um.conj().T
    return HermitianTuple([HermitianMatrix(um @ m.mat @ uh) for m in a])


def d2_distance(u: UnitaryTuple, v: UnitaryTuple) -> float:
    """sqrt(sum_i ||U_i - V_i||^2) in the normalized 2-norm, on tuples of
    unitaries of equal shape."""
    if len(u) != len(v) or u.n != v.n:
        raise InvalidInputError(
            f"shape mismatch: ({len(u)} tuples of size {u.n}) vs ({len(v)} of size {v.n})"
        )
    total = 0.0
    for ui, vi in zip(u, v):
        diff = ui.mat - vi.mat
        total += float(np.sum(np.abs(diff) ** 2)) / u.n
    return math.sqrt(total)


def matrix_to_json(mat) -> dict:
    """Serialize to the fixture shape {"n": N, "re": [[...]], "im": [[...]]}."""
    m = _unwrap(mat)
    return {
        "n": int(m.shape[0]),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    n = int(obj["n"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.shape != (n, n) or im.shape != (n, n):
        raise InvalidInputError(f"matrix JSON claims n={n} but parts have shapes {re.shape}, {im.shape}")
    return re + 1j * im
