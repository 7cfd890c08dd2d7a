"""Operator algebra for d-level systems.

Shift/phase (Weyl-Heisenberg) operators, the discrete Fourier matrix,
expansion of operators in the Weyl-Heisenberg basis, generalized Gell-Mann
matrices, Haar-random unitaries and Hamiltonian exponentials.  Everything
here is a pure function of its arguments; heavy per-dimension tables are
memoized on the dimension only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

ATOL_UNITARY = 1e-10


class DimensionError(ValueError):
    """Requested dimension is not supported."""


class ShapeError(ValueError):
    """Input array has the wrong shape."""


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DimensionError(f"dimension must be an integer >= 2, got {d!r}")


def omega(d: int) -> complex:
    """Primitive d-th root of unity exp(2*pi*i/d)."""
    return np.exp(2j * np.pi / d)


def wh_indices(d: int) -> list[tuple[int, int]]:
    """All index pairs (n_x, n_z) in row-major order; flat index is n_x*d + n_z."""
    return [(nx, nz) for nx in range(d) for nz in range(d)]


def neg_index(p: tuple[int, int], d: int) -> tuple[int, int]:
    """The conjugate index (d - p_x mod d, d - p_z mod d)."""
    return ((d - p[0]) % d, (d - p[1]) % d)


def shift_matrix(d: int) -> np.ndarray:
    """X|k> = |k+1 mod d>."""
    _check_dim(d)
    X = np.zeros((d, d), dtype=complex)
    for k in range(d):
        X[(k + 1) % d, k] = 1.0
    return X


def phase_matrix(d: int) -> np.ndarray:
    """Z|k> = omega^k |k>."""
    _check_dim(d)
    return np.diag(omega(d) ** np.arange(d))


def wh_operator(n: tuple[int, int], d: int) -> np.ndarray:
    """Weyl-Heisenberg operator X^{n_x} Z^{n_z} (indices reduced mod d)."""
    _check_dim(d)
    nx, nz = n[0] % d, n[1] % d
    # X^nx Z^nz |k> = omega^(k*nz) |k+nx>
    M = np.zeros((d, d), dtype=complex)
    w = omega(d)
    for k in range(d):
        M[(k + nx) % d, k] = w ** (k * nz)
    return M


@lru_cache(maxsize=32)
def _wh_stack(d: int) -> np.ndarray:
    """Array of shape (d*d, d, d) holding every D_n in row-major index order."""
    stack = np.empty((d * d, d, d), dtype=complex)
    for i, n in enumerate(wh_indices(d)):
        stack[i] = wh_operator(n, d)
    stack.setflags(write=False)
    return stack


def fourier_matrix(d: int) -> np.ndarray:
    """Discrete Fourier matrix, F_{jk} = omega^{jk} / sqrt(d)."""
    _check_dim(d)
    j = np.arange(d)
    return omega(d) ** np.outer(j, j) / np.sqrt(d)


@dataclass(frozen=True)
class WHCoefficients:
    """Coefficients u_{n_x,n_z} of an operator in the Weyl-Heisenberg basis.

    ``u`` is a (d, d) complex array indexed [n_x, n_z].  The magnitude and
    phase views r/phi follow u = r * exp(i*phi).
    """

    d: int
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (self.d, self.d):
            raise ShapeError(f"coefficient array must be ({self.d},{self.d})")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def r(self) -> np.ndarray:
        return np.abs(self.u)

    @property
    def phi(self) -> np.ndarray:
        return np.angle(self.u)

    def flat(self) -> np.ndarray:
        """Coefficients as a d^2 vector in row-major (n_x major) order."""
        return self.u.reshape(-1)

    def coeff(self, n: tuple[int, int]) -> complex:
        return complex(self.u[n[0] % self.d, n[1] % self.d])

    def phase_fixed(self) -> "WHCoefficients":
        """Same operator times a global phase making u_{0,0} real nonnegative.

        Leaves the coefficients untouched when u_{0,0} = 0 (the convention
        has no effect on magnitudes in that case).
        """
        u00 = self.u[0, 0]
        if abs(u00) == 0.0:
            return self
        return WHCoefficients(self.d, self.u * np.exp(-1j * np.angle(u00)))


def wh_expand(U: np.ndarray) -> WHCoefficients:
    """Expansion coefficients u_n = Tr[D_n^dag U] / d of a square matrix."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {U.shape}")
    d = U.shape[0]
    _check_dim(d)
    stack = _wh_stack(d)
    # Tr[D^dag U] = sum_{ij} conj(D_ij) U_ij
    u = np.einsum("nij,ij->n", stack.conj(), U) / d
    return WHCoefficients(d, u.reshape(d, d))


def wh_reconstruct(c: WHCoefficients) -> np.ndarray:
    """Sum u_n D_n.  Unitarity of the result is the caller's concern."""
    stack = _wh_stack(c.d)
    return np.tensordot(c.flat(), stack, axes=(0, 0))


def unitarity_residual(c: WHCoefficients, p: tuple[int, int]) -> complex:
    """Deviation of the coefficient map from the unitarity constraint at p.

    For p != (0,0) returns sum_m conj(u_m) u_{p+m} omega^{-m_x p_z}, which
    vanishes iff the coefficients come from a unitary.  For p = (0,0) the
    constraint degenerates to normalization and sum r^2 - 1 is returned.
    """
    d = c.d
    px, pz = p[0] % d, p[1] % d
    if (px, pz) == (0, 0):
        return complex(np.sum(np.abs(c.u) ** 2) - 1.0)
    shifted = np.roll(c.u, (-px, -pz), axis=(0, 1))  # entry m -> u_{p+m}
    phases = omega(d) ** (-(np.arange(d) * pz))  # omega^{-m_x p_z}
    return complex(np.sum(c.u.conj() * shifted * phases[:, None]))


@dataclass(frozen=True)
class GellMannBasis:
    """The d^2-1 generalized Gell-Mann matrices with Tr[T_i T_j] = 2 delta_ij.

    Order: symmetric pairs (j<k) lexicographically, then antisymmetric pairs,
    then the d-1 diagonal matrices.  ``normalized`` holds sqrt(d/2) * T_k.
    """

    d: int
    matrices: np.ndarray  # (d^2-1, d, d)

    @property
    def normalized(self) -> np.ndarray:
        return np.sqrt(self.d / 2.0) * self.matrices


@lru_cache(maxsize=32)
def gell_mann_basis(d: int) -> GellMannBasis:
    """Construct the generalized Gell-Mann matrices for dimension d."""
    _check_dim(d)
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            M = np.zeros((d, d), dtype=complex)
            M[j, k] = 1.0
            M[k, j] = 1.0
            mats.append(M)
    for j in range(d):
        for k in range(j + 1, d):
            M = np.zeros((d, d), dtype=complex)
            M[j, k] = -1.0j
            M[k, j] = 1.0j
            mats.append(M)
    for l in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.sqrt(2.0 / (l * (l + 1))) * np.diag(diag))
    stack = np.array(mats)
    stack.setflags(write=False)
    return GellMannBasis(d, stack)


def gm_to_wh_vector(k: int, d: int) -> np.ndarray:
    """WH-basis components of the k-th normalized Gell-Mann matrix (k from 1).

    Returns the length-d^2 vector with entries Tr[D_i^dag T~_k] / d in
    row-major index order.  Together with the identity direction these
    vectors form an orthonormal basis of the coefficient space.
    """
    if not 1 <= k <= d * d - 1:
        raise IndexError(f"basis index must be in [1, {d * d - 1}], got {k}")
    basis = gell_mann_basis(d)
    return wh_expand(basis.normalized[k - 1]).flat()


@lru_cache(maxsize=32)
def gm_measurement_matrix(d: int) -> np.ndarray:
    """Rows <g_k| of the measurement basis induced by normalized Gell-Mann matrices.

    Row 0 is the identity direction; row k (k>=1) is conj(t~^{(k)}).
    Applied to a control-state amplitude vector it yields the amplitudes
    whose squared moduli are the gm-basis outcome probabilities.
    """
    B = np.zeros((d * d, d * d), dtype=complex)
    B[0, 0] = 1.0
    for k in range(1, d * d):
        B[k] = gm_to_wh_vector(k, d).conj()
    B.setflags(write=False)
    return B


def haar_random_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix.

    ``seed`` may be an integer or a numpy Generator; a fixed integer seed
    gives a deterministic result.
    """
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R).copy()
    diag[diag == 0] = 1.0
    return Q * (diag / np.abs(diag))


def random_pure_state(d: int, seed) -> np.ndarray:
    """Haar-random state vector of dimension d."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class HamiltonianParams:
    """Real coefficients of a Hamiltonian in the Gell-Mann basis."""

    d: int
    values: np.ndarray  # length d^2 - 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.d * self.d - 1,):
            raise ShapeError(
                f"expected {self.d * self.d - 1} parameters, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("Hamiltonian parameters must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def exp_hamiltonian(p: HamiltonianParams) -> np.ndarray:
    """U = exp(i sum_j lambda_j T_j) via Hermitian eigendecomposition."""
    basis = gell_mann_basis(p.d)
    H = np.tensordot(p.values, basis.matrices, axes=(0, 0))
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w)) @ V.conj().T


def qubit_unitary(alpha: float, theta: float, phi: float) -> np.ndarray:
    """exp(-i alpha n.sigma) with n in spherical coordinates (theta, phi)."""
    nx = np.sin(theta) * np.cos(phi)
    ny = np.sin(theta) * np.sin(phi)
    nz = np.cos(theta)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    n_sigma = nx * X + ny * Y + nz * Z
    return np.cos(alpha) * np.eye(2) - 1j * np.sin(alpha) * n_sigma


def is_unitary(U: np.ndarray, atol: float = ATOL_UNITARY) -> bool:
    U = np.asarray(U)
    d = U.shape[0]
    return bool(np.max(np.abs(U @ U.conj().T - np.eye(d))) <= atol)


@dataclass(frozen=True)
class PartitionSets:
    """Split of the d^2 index pairs into identity, self-paired and conjugate pairs.

    ``splus`` holds the lexicographically smaller member of each conjugate
    pair {p, -p}; ``sminus`` the matching conjugates, aligned elementwise.
    """

    d: int
    s0: tuple[tuple[int, int], ...]
    su: tuple[tuple[int, int], ...]
    splus: tuple[tuple[int, int], ...]
    sminus: tuple[tuple[int, int], ...]


@lru_cache(maxsize=32)
def partition_indices(d: int) -> PartitionSets:
    """Canonical partition of Z_d^2 used by the close-to-identity estimator."""
    _check_dim(d)
    s0 = ((0, 0),)
    su: list[tuple[int, int]] = []
    if d % 2 == 0:
        h = d // 2
        su = [(0, h), (h, 0), (h, h)]
        su.sort()
    splus = []
    for p in wh_indices(d):
        if p == (0, 0) or p in su:
            continue
        q = neg_index(p, d)
        if p < q:
            splus.append(p)
    splus.sort()
    sminus = [neg_index(p, d) for p in splus]
    return PartitionSets(d, s0, tuple(su), tuple(splus), tuple(sminus))
