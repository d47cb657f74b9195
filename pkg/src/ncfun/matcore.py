"""Dense complex linear algebra kernel.

Matrices are plain ``complex128`` numpy arrays. A point of the matrix
universe (a d-tuple of n x n matrices) is a :class:`MatrixTuple`.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as spla

from .errors import DimensionError, SingularMatrixError

__all__ = [
    "SINGULAR_RTOL",
    "as_matrix",
    "lu_det",
    "solve_inv",
    "solve",
    "slogdet",
    "expm",
    "expm_frechet",
    "MatrixTuple",
    "direct_sum",
    "direct_power",
    "random_tuple",
    "random_unitary",
    "matrix_to_json",
    "matrix_from_json",
]

#: pivots below ``SINGULAR_RTOL * scale`` flag a matrix as singular
SINGULAR_RTOL = 1e-12


def as_matrix(a, square=False):
    """Validate ``a`` and return it as a 2-D complex128 array.

    Parameters
    ----------
    a : array_like
        Candidate matrix.
    square : bool
        Require a square matrix.

    Raises
    ------
    DimensionError
        If ``a`` is not 2-D, not square when required, or not finite.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError("matrix has non-finite entries")
    return m


def _max_row_norm(m):
    return float(np.abs(m).sum(axis=1).max()) if m.size else 0.0


def _lu(m):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.LinAlgWarning)
        return spla.lu_factor(m, check_finite=False)


def _factor(m, scale):
    """Pivoted LU with the singularity test; returns (lu, piv, min_pivot)."""
    lu, piv = _lu(m)
    pivots = np.abs(np.diag(lu))
    min_pivot = float(pivots.min())
    threshold = SINGULAR_RTOL * max(_max_row_norm(m), scale or 0.0)
    if not min_pivot > threshold:
        raise SingularMatrixError(
            f"matrix is singular to working precision "
            f"(pivot {min_pivot:.3e} <= {threshold:.3e})",
            pivot=min_pivot,
            threshold=threshold,
        )
    return lu, piv, min_pivot


def lu_det(m):
    """Determinant by partial-pivot LU.

    Singular matrices are not an error here; their determinant is simply
    small (or exactly zero).
    """
    m = as_matrix(m, square=True)
    if m.shape[0] == 0:
        return 1.0 + 0.0j
    lu, piv = _lu(m)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    det = np.prod(np.diag(lu))
    return complex(-det if swaps % 2 else det)


def slogdet(m):
    """Return ``(sign, log|det m|)`` with ``sign`` a unit complex number."""
    m = as_matrix(m, square=True)
    if m.shape[0] == 0:
        return 1.0 + 0.0j, 0.0
    sign, logabs = np.linalg.slogdet(m)
    return complex(sign), float(logabs)


def solve_inv(m, scale=None, return_cond=False):
    """Invert a square matrix.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Matrix to invert.
    scale : float, optional
        Magnitude against which pivots are judged, in addition to the
        maximum row norm of ``m``. Callers that know ``m`` came out of a
        cancelling sum pass the size of the summands here, so that a
        numerically vanishing result is reported as singular.
    return_cond : bool
        Also return the 1-norm condition estimate ``|m|_1 |m^-1|_1``.

    Raises
    ------
    SingularMatrixError
        If some pivot falls below ``SINGULAR_RTOL * max(rownorm, scale)``.
    """
    m = as_matrix(m, square=True)
    n = m.shape[0]
    if n == 0:
        inv = np.zeros((0, 0), dtype=np.complex128)
        return (inv, 1.0) if return_cond else inv
    lu, piv, _ = _factor(m, scale)
    inv = spla.lu_solve((lu, piv), np.eye(n, dtype=np.complex128), check_finite=False)
    if return_cond:
        cond = float(np.linalg.norm(m, 1) * np.linalg.norm(inv, 1))
        return inv, cond
    return inv


def solve(m, rhs, scale=None):
    """Solve ``m z = rhs`` with the same singularity test as :func:`solve_inv`."""
    m = as_matrix(m, square=True)
    rhs = np.asarray(rhs, dtype=np.complex128)
    if m.shape[0] != rhs.shape[0]:
        raise DimensionError(f"cannot solve {m.shape} system with rhs {rhs.shape}")
    if m.shape[0] == 0:
        return rhs.copy()
    lu, piv, _ = _factor(m, scale)
    return spla.lu_solve((lu, piv), rhs, check_finite=False)


def expm(a):
    """Matrix exponential (scaling and squaring, degree-13 Pade)."""
    a = as_matrix(a, square=True)
    if a.shape[0] == 0:
        return a.copy()
    return spla.expm(a)


def expm_frechet(a, e):
    """Matrix exponential and its Frechet derivative.

    Uses the block identity ``exp([[A, E], [0, A]]) = [[e^A, L], [0, e^A]]``
    where ``L = L(A, E)`` is the derivative of ``exp`` at ``A`` in
    direction ``E``. ``E`` is rescaled to the size of ``A`` first so the
    block matrix does not distort the scaling step; ``L`` is linear in ``E``.

    Returns
    -------
    exp_a, frechet : ndarray
    """
    a = as_matrix(a, square=True)
    e = as_matrix(e, square=True)
    if a.shape != e.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {e.shape}")
    n = a.shape[0]
    enorm = np.linalg.norm(e, 1)
    if n == 0 or enorm == 0.0:
        return expm(a), np.zeros_like(a)
    s = max(np.linalg.norm(a, 1), 1.0) / enorm
    big = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    big[:n, :n] = a
    big[n:, n:] = a
    big[:n, n:] = s * e
    eb = spla.expm(big)
    return eb[:n, :n], eb[:n, n:] / s


class MatrixTuple:
    """An immutable d-tuple of n x n complex matrices.

    Parameters
    ----------
    mats : array_like
        Either an array of shape ``(d, n, n)`` or a sequence of ``d``
        square matrices of equal size. ``n = 0`` is allowed (the neutral
        element of the direct sum) and then ``d`` must be given.
    d : int, optional
        Number of variables; only needed when ``mats`` is empty.
    """

    __slots__ = ("_mats",)

    def __init__(self, mats, d=None):
        if isinstance(mats, MatrixTuple):
            arr = mats._mats
        elif isinstance(mats, np.ndarray) and mats.ndim == 3:
            arr = np.array(mats, dtype=np.complex128)
        else:
            mats = [as_matrix(m, square=True) for m in mats]
            if not mats:
                raise DimensionError("a matrix tuple needs at least one variable")
            n = mats[0].shape[0]
            if any(m.shape != (n, n) for m in mats):
                raise DimensionError("all components must share the same size")
            arr = np.stack(mats)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise DimensionError(f"bad tuple array shape {arr.shape}")
        if d is not None and arr.shape[0] != d:
            if arr.shape[1] == 0:
                arr = np.zeros((d, 0, 0), dtype=np.complex128)
            else:
                raise DimensionError(f"expected {d} variables, got {arr.shape[0]}")
        if arr.shape[0] < 1:
            raise DimensionError("a matrix tuple needs at least one variable")
        if not np.all(np.isfinite(arr)):
            raise DimensionError("matrix tuple has non-finite entries")
        arr.flags.writeable = False
        self._mats = arr

    @classmethod
    def empty(cls, d):
        """The size-0 tuple with ``d`` variables."""
        return cls(np.zeros((d, 0, 0), dtype=np.complex128))

    @property
    def n(self):
        return self._mats.shape[1]

    @property
    def d(self):
        return self._mats.shape[0]

    @property
    def array(self):
        """Read-only ``(d, n, n)`` view of the components."""
        return self._mats

    def __len__(self):
        return self.d

    def __getitem__(self, i):
        return self._mats[i]

    def __iter__(self):
        return iter(self._mats)

    def __repr__(self):
        return f"MatrixTuple(n={self.n}, d={self.d})"

    def __eq__(self, other):
        if not isinstance(other, MatrixTuple):
            return NotImplemented
        return self._mats.shape == other._mats.shape and bool(
            np.array_equal(self._mats, other._mats)
        )

    __hash__ = None

    def _check_compatible(self, other):
        if self._mats.shape != other._mats.shape:
            raise DimensionError(
                f"tuple shapes differ: {self._mats.shape} vs {other._mats.shape}"
            )

    def __add__(self, other):
        self._check_compatible(other)
        return MatrixTuple(self._mats + other._mats)

    def __sub__(self, other):
        self._check_compatible(other)
        return MatrixTuple(self._mats - other._mats)

    def __mul__(self, c):
        return MatrixTuple(complex(c) * self._mats)

    __rmul__ = __mul__

    def __neg__(self):
        return MatrixTuple(-self._mats)

    def norm(self):
        """Frobenius norm of the stacked components."""
        return float(np.linalg.norm(self._mats.ravel()))

    def conj_by(self, u):
        """The tuple ``U* X U`` (componentwise)."""
        u = as_matrix(u, square=True)
        return MatrixTuple(u.conj().T @ self._mats @ u)

    def allclose(self, other, rtol=1e-12, atol=1e-12):
        return self._mats.shape == other._mats.shape and bool(
            np.allclose(self._mats, other._mats, rtol=rtol, atol=atol)
        )

    def to_json(self):
        return {
            "n": self.n,
            "d": self.d,
            "mats": [matrix_to_json(m) for m in self._mats],
        }

    @classmethod
    def from_json(cls, obj):
        """Decode ``{"n": n, "d": d, "mats": [matrix, ...]}``."""
        try:
            n, d, mats = int(obj["n"]), int(obj["d"]), obj["mats"]
        except (KeyError, TypeError) as exc:
            raise DimensionError(f"malformed tuple JSON: {exc}") from None
        if len(mats) != d:
            raise DimensionError(f"tuple JSON declares d={d} but has {len(mats)} mats")
        arr = np.zeros((d, n, n), dtype=np.complex128)
        for i, m in enumerate(mats):
            mi = matrix_from_json(m)
            if mi.shape != (n, n):
                raise DimensionError(f"component {i} has shape {mi.shape}, expected {(n, n)}")
            arr[i] = mi
        return cls(arr)


def direct_sum(x, y):
    """Componentwise block-diagonal sum ``X (+) Y``."""
    if x.d != y.d:
        raise DimensionError(f"variable counts differ: {x.d} vs {y.d}")
    n1, n2 = x.n, y.n
    out = np.zeros((x.d, n1 + n2, n1 + n2), dtype=np.complex128)
    out[:, :n1, :n1] = x.array
    out[:, n1:, n1:] = y.array
    return MatrixTuple(out)


def direct_power(x, k):
    """``X (+) ... (+) X`` with ``k`` summands (``k = 0`` gives the empty tuple)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    eye = np.eye(k, dtype=np.complex128)
    return MatrixTuple(np.stack([np.kron(eye, m) for m in x.array]).reshape(x.d, k * x.n, k * x.n))


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_tuple(n, d, seed):
    """d independent n x n standard complex Gaussian matrices.

    Entries are ``(a + ib)/sqrt(2)`` with ``a, b`` iid standard normal, so
    ``E|z|^2 = 1``. ``seed`` is an int or a ``numpy.random.Generator``.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    rng = _rng(seed)
    z = rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n))
    return MatrixTuple(z / np.sqrt(2.0))


def random_unitary(n, seed):
    """Approximately Haar unitary from QR of a complex Gaussian matrix.

    The phases of ``R``'s diagonal are folded into ``Q`` so the result does
    not depend on the QR sign convention.
    """
    rng = _rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[np.newaxis, :]


def matrix_to_json(m):
    """Encode as ``{"rows", "cols", "data": [[[re, im], ...], ...]}``."""
    m = np.asarray(m, dtype=np.complex128)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_json(obj):
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
        m = np.array(
            [[complex(re, im) for re, im in row] for row in data], dtype=np.complex128
        ).reshape(len(data), -1 if data else 0)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"malformed matrix JSON: {exc}") from None
    if m.shape != (rows, cols):
        raise DimensionError(f"matrix JSON declares {rows}x{cols} but data is {m.shape}")
    return as_matrix(m)
