"""Gate-level simulation of the three-wire estimation circuits.

The register holds a target qudit on wire 0 and two control qudits on
wires 1 and 2.  States are immutable; application of a circuit is a pure
function, with a statevector backend for ideal runs and a density-matrix
backend that interleaves noise channels between gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import prod

import numpy as np

from . import core
from .noise import NoiseParams, depolarizing_channel, thermal_relaxation_channel

ATOL_NORM = 1e-10

SINGLE_WIRE_KINDS = frozenset(
    {"local", "fourier", "inverse-fourier", "shift", "qubit-h", "qubit-s"}
)
CONTROLLED_KINDS = frozenset(
    {"cshift", "cphase", "cshift-dagger", "cphase-dagger"}
)
BASIS_TAGS = ("computational", "tildeH", "qubit-X", "qubit-Y", "gm-basis")


class WiringError(ValueError):
    """Gate refers to invalid or coinciding wires."""


class LayoutMismatch(ValueError):
    """State and circuit disagree on the wire layout."""


class NormalizationError(ValueError):
    """State vector is not normalized."""


class InvalidDistribution(ValueError):
    """Probability vector is outside the simplex."""


class BasisUnavailable(ValueError):
    """Measurement basis not defined at this dimension."""


@dataclass(frozen=True)
class WireLayout:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise WiringError(f"all wire dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def size(self) -> int:
        return prod(self.dims)


@dataclass(frozen=True)
class PureState:
    layout: WireLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.layout.size,):
            raise LayoutMismatch(
                f"amplitude vector of length {amp.shape} does not match layout "
                f"{self.layout.dims}"
            )
        if abs(np.linalg.norm(amp) - 1.0) > ATOL_NORM:
            raise NormalizationError("state vector must have unit norm")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


@dataclass(frozen=True)
class DensityState:
    layout: WireLayout
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        n = self.layout.size
        if rho.shape != (n, n):
            raise LayoutMismatch("density matrix does not match layout")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-8:
            raise ValueError("density matrix must have unit trace")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


@dataclass(frozen=True)
class GateOp:
    """One gate: a kind tag, the wires it acts on, and kind-specific data."""

    kind: str
    wires: tuple[int, ...]
    offset: int = 0
    matrix: np.ndarray | None = None


@dataclass(frozen=True)
class Circuit:
    layout: WireLayout
    ops: tuple[GateOp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        n = len(self.layout.dims)
        for op in self.ops:
            if any(not 0 <= w < n for w in op.wires):
                raise WiringError(f"gate {op.kind} uses wires {op.wires} outside layout")
            if len(set(op.wires)) != len(op.wires):
                raise WiringError(f"gate {op.kind} repeats a wire: {op.wires}")
        object.__setattr__(self, "ops", tuple(self.ops))


def controlled_gate(kind: str, target: int, control: int, offset: int, d: int) -> np.ndarray:
    """Explicit operator on (target, control) for a shifted-control gate.

    For control basis state |c> the target receives the base-operator power
    c + offset (mod d); dagger kinds apply the inverse power.  The returned
    matrix acts on the two-wire space with the target index major.
    """
    if target == control:
        raise WiringError("controlled gate needs two distinct wires")
    if kind not in CONTROLLED_KINDS:
        raise WiringError(f"unknown controlled kind {kind!r}")
    base_index = (1, 0) if "shift" in kind else (0, 1)
    dagger = kind.endswith("dagger")
    M = np.zeros((d * d, d * d), dtype=complex)
    for c in range(d):
        power = (c + offset) % d
        if dagger:
            power = (-power) % d
        target_op = core.wh_operator((base_index[0] * power, base_index[1] * power), d)
        M += np.kron(target_op, np.outer(_basis_vec(d, c), _basis_vec(d, c).conj()))
    return M


def _basis_vec(d: int, k: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def _gate_matrix(op: GateOp, layout: WireLayout) -> np.ndarray:
    d = layout.dims[op.wires[0]]
    if op.kind == "local":
        return np.asarray(op.matrix, dtype=complex)
    if op.kind == "fourier":
        return core.fourier_matrix(d)
    if op.kind == "inverse-fourier":
        return core.fourier_matrix(d).conj().T
    if op.kind == "shift":
        return core.shift_matrix(d)
    if op.kind == "qubit-h":
        if d != 2:
            raise WiringError("qubit-h requires a two-level wire")
        return core.fourier_matrix(2)
    if op.kind == "qubit-s":
        if d != 2:
            raise WiringError("qubit-s requires a two-level wire")
        return np.diag([1.0, 1.0j])
    if op.kind in CONTROLLED_KINDS:
        return controlled_gate(op.kind, op.wires[0], op.wires[1], op.offset, d)
    if op.kind == "tilde-h":
        return tilde_h_operator(d)
    raise WiringError(f"unknown gate kind {op.kind!r}")


def _apply_on_wires(amp: np.ndarray, dims: tuple[int, ...], M: np.ndarray,
                    wires: tuple[int, ...]) -> np.ndarray:
    psi = amp.reshape(dims)
    k = len(wires)
    psi = np.moveaxis(psi, wires, range(k))
    head = prod(psi.shape[:k])
    rest = psi.shape[k:]
    psi = M @ psi.reshape(head, -1)
    psi = psi.reshape(tuple(dims[w] for w in wires) + rest)
    psi = np.moveaxis(psi, range(k), wires)
    return psi.reshape(-1)


def embed_operator(M: np.ndarray, wires: tuple[int, ...], dims: tuple[int, ...]) -> np.ndarray:
    """Operator on the full register acting as M on the given wires."""
    n = len(dims)
    rest = [i for i in range(n) if i not in wires]
    big = np.kron(M, np.eye(prod(dims[r] for r in rest) if rest else 1))
    perm = list(wires) + rest
    shape = [dims[p] for p in perm]
    T = big.reshape(shape + shape)
    pos = {w: i for i, w in enumerate(perm)}
    axes = [pos[w] for w in range(n)] + [n + pos[w] for w in range(n)]
    D = prod(dims)
    return T.transpose(axes).reshape(D, D)


def apply_circuit(circuit: Circuit, state: PureState) -> PureState:
    if circuit.layout != state.layout:
        raise LayoutMismatch("circuit and state layouts differ")
    amp = state.amplitudes
    dims = circuit.layout.dims
    for op in circuit.ops:
        amp = _apply_on_wires(amp, dims, _gate_matrix(op, circuit.layout), op.wires)
    return PureState(circuit.layout, amp)


def _apply_channel_density(rho: np.ndarray, kraus_ops, wires, dims) -> np.ndarray:
    out = np.zeros_like(rho)
    for K in kraus_ops:
        E = embed_operator(K, tuple(wires), dims)
        out += E @ rho @ E.conj().T
    return out


def apply_circuit_density(circuit: Circuit, state: DensityState,
                          noise: NoiseParams | None = None) -> DensityState:
    """Apply each gate as a channel: ideal unitary, then the configured noise.

    Per gate the composition is ideal conjugation, a depolarizing error on
    the gate's wires, then thermal relaxation on every wire for the gate's
    duration.  Relaxation is defined for qubit wires only; layouts with
    d > 2 accept depolarizing noise alone.
    """
    if circuit.layout != state.layout:
        raise LayoutMismatch("circuit and state layouts differ")
    dims = circuit.layout.dims
    if noise is not None and noise.relaxes() and any(d != 2 for d in dims):
        raise WiringError("relaxation noise is only defined for qubit wires")
    rho = state.matrix.copy()
    for op in circuit.ops:
        U = _gate_matrix(op, circuit.layout)
        E = embed_operator(U, op.wires, dims)
        rho = E @ rho @ E.conj().T
        if noise is None:
            continue
        if op.kind in SINGLE_WIRE_KINDS:
            p_err = noise.p_sx[op.wires[0]]
            duration = noise.durations["single"]
        else:
            p_err = noise.p_cx.get(tuple(sorted(op.wires)), 0.0)
            duration = noise.durations["two"]
        if p_err > 0:
            dim_sub = prod(dims[w] for w in op.wires)
            chan = depolarizing_channel(p_err, dim_sub)
            rho = _apply_channel_density(rho, chan.ops, op.wires, dims)
        if duration > 0:
            rho = _relax_all_wires(rho, dims, noise, duration)
    return DensityState(circuit.layout, rho)


def _relax_all_wires(rho: np.ndarray, dims, noise: NoiseParams, duration: float) -> np.ndarray:
    for w in range(len(dims)):
        if np.isfinite(noise.t1[w]):
            chan = thermal_relaxation_channel(noise.t1[w], noise.t2[w], duration)
            rho = _apply_channel_density(rho, chan.ops, (w,), dims)
    return rho


def build_estimation_circuit(d: int, U: np.ndarray, final_shift: bool = True) -> Circuit:
    """Gate sequence mapping the expansion coefficients of U onto the controls.

    After the circuit the register factorizes into the untouched target and
    a control state whose amplitude on |m>|n> is the coefficient u_{m,n}.
    With ``final_shift=False`` the last shift on control 2 is left out, so
    the coefficient index on that wire stays offset by one (the convention
    used by the qubit measurement circuits).
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (d, d):
        raise core.ShapeError(f"expected a {d}x{d} matrix, got {U.shape}")
    if not core.is_unitary(U):
        raise ValueError("gate to estimate must be unitary")
    ops = [
        GateOp("fourier", (1,)),
        GateOp("fourier", (2,)),
        GateOp("cshift", (0, 2), offset=0),
        GateOp("cphase-dagger", (0, 1), offset=1),
        GateOp("local", (0,), matrix=U),
        GateOp("cphase", (0, 1), offset=0),
        GateOp("cshift-dagger", (0, 2), offset=1),
        GateOp("inverse-fourier", (1,)),
        GateOp("inverse-fourier", (2,)),
        GateOp("cshift-dagger", (0, 1), offset=-1),
        GateOp("cphase-dagger", (0, 2), offset=0),
    ]
    if final_shift:
        ops.append(GateOp("shift", (2,)))
    return Circuit(WireLayout((d, d, d)), tuple(ops))


def qubit_basis_change_ops(basis: str) -> tuple[GateOp, ...]:
    """Control-register gates turning a Z measurement into an X or Y one."""
    if basis in ("computational", "qubit-Z"):
        return ()
    if basis == "qubit-X":
        return (GateOp("qubit-h", (1,)), GateOp("qubit-h", (2,)))
    if basis == "qubit-Y":
        return (
            GateOp("qubit-s", (1,)),
            GateOp("qubit-s", (2,)),
            GateOp("qubit-h", (1,)),
            GateOp("qubit-h", (2,)),
        )
    raise BasisUnavailable(f"no basis-change gates for {basis!r}")


def initial_state(psi: np.ndarray, d: int) -> PureState:
    """|psi> on the target wire, both controls in |0>."""
    psi = np.asarray(psi, dtype=complex)
    amp = np.zeros(d ** 3, dtype=complex)
    amp.reshape(d, d, d)[:, 0, 0] = psi
    return PureState(WireLayout((d, d, d)), amp)


def run_estimation(U: np.ndarray, psi: np.ndarray, d: int | None = None):
    """Run the estimation circuit and factor the product output.

    Returns (target state, control state).  The control amplitudes equal
    the Weyl-Heisenberg coefficients of U; the target returns to psi and
    the control state does not depend on psi.
    """
    U = np.asarray(U, dtype=complex)
    if d is None:
        d = U.shape[0]
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > ATOL_NORM:
        raise NormalizationError("target state must be normalized")
    circ = build_estimation_circuit(d, U)
    out = apply_circuit(circ, initial_state(psi, d))
    M = out.amplitudes.reshape(d, d * d)
    control = psi.conj() @ M
    target = M @ control.conj()
    control = control / np.linalg.norm(control)
    target = target / np.linalg.norm(target)
    return (
        PureState(WireLayout((d,)), target),
        PureState(WireLayout((d, d)), control),
    )


def probe_state(psi: np.ndarray, d: int) -> PureState:
    """The entangled three-wire state on which the unknown gate acts.

    (1/d) sum_{j1,j2} Z^{-j1-1} X^{j2} |psi> |j1> |j2>; Fisher information
    matrices are evaluated on this state.
    """
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > ATOL_NORM:
        raise NormalizationError("target state must be normalized")
    w = core.omega(d)
    amp = np.empty((d, d, d), dtype=complex)
    for j1 in range(d):
        for j2 in range(d):
            shifted = np.roll(psi, j2)  # X^{j2} |psi>
            phases = w ** (-(np.arange(d) * (j1 + 1)))
            amp[:, j1, j2] = phases * shifted / d
    return PureState(WireLayout((d, d, d)), amp.reshape(-1))


@lru_cache(maxsize=32)
def tilde_h_operator(d: int) -> np.ndarray:
    """Block-Hadamard on the control pair mixing each conjugate index pair.

    Identity on the (0,0) index and self-paired indexes; a 2x2 Hadamard on
    every {p, -p} subspace, turning phase differences into populations.
    """
    parts = core.partition_indices(d)
    n = d * d
    H = np.eye(n)
    s = 1.0 / np.sqrt(2.0)
    for a, m in zip(parts.splus, parts.sminus):
        ia = a[0] * d + a[1]
        im = m[0] * d + m[1]
        H[ia, ia] = s
        H[ia, im] = s
        H[im, ia] = s
        H[im, im] = -s
    H.setflags(write=False)
    return H


def basis_change_matrix(basis: str, d: int) -> np.ndarray:
    """Rows are the measurement bras applied to control amplitudes."""
    if basis == "computational":
        return np.eye(d * d)
    if basis == "tildeH":
        return tilde_h_operator(d)
    if basis == "gm-basis":
        return core.gm_measurement_matrix(d)
    if basis in ("qubit-X", "qubit-Y"):
        if d != 2:
            raise BasisUnavailable(f"{basis} requires d=2, got d={d}")
        H = core.fourier_matrix(2)
        S = np.diag([1.0, 1.0j])
        one = H if basis == "qubit-X" else H @ S
        return np.kron(one, one)
    raise BasisUnavailable(f"unknown basis tag {basis!r}")


def outcome_labels(basis: str, d: int) -> list:
    """Canonical outcome order for each measurement basis."""
    if basis == "gm-basis":
        return list(range(d * d))
    return core.wh_indices(d)


def born_probabilities(state, basis: str) -> np.ndarray:
    """Outcome probabilities for a control state in the given basis.

    Accepts the pure control state (layout (d, d)) or a control density
    matrix.  The tildeH tag applies the block-Hadamard first; qubit-X/Y
    apply the qubit basis-change gates; gm-basis projects onto the
    identity direction and the normalized Gell-Mann directions.
    """
    if isinstance(state, PureState):
        if len(state.layout.dims) != 2:
            raise LayoutMismatch("expected a two-wire control state")
        d = state.layout.dims[0]
        B = basis_change_matrix(basis, d)
        probs = np.abs(B @ state.amplitudes) ** 2
    elif isinstance(state, DensityState):
        if len(state.layout.dims) != 2:
            raise LayoutMismatch("expected a two-wire control density matrix")
        d = state.layout.dims[0]
        B = basis_change_matrix(basis, d)
        probs = np.real(np.diag(B @ state.matrix @ B.conj().T))
    else:
        raise TypeError("state must be a PureState or DensityState")
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise InvalidDistribution(f"probabilities sum to {total}")
    return probs / total


def reduced_control_density(state: DensityState) -> DensityState:
    """Trace out the target wire of a three-wire density matrix."""
    d0, d1, d2 = state.layout.dims
    rho6 = state.matrix.reshape(d0, d1, d2, d0, d1, d2)
    red = np.einsum("abcade->bcde", rho6).reshape(d1 * d2, d1 * d2)
    return DensityState(WireLayout((d1, d2)), red)


@dataclass(frozen=True)
class MeasurementCounts:
    """Outcome counts for one measured basis."""

    basis: str
    counts: dict
    shots: int

    def __post_init__(self):
        if self.shots < 1:
            raise InvalidDistribution("shots must be >= 1")
        total = sum(self.counts.values())
        if total != self.shots:
            raise InvalidDistribution(
                f"counts sum to {total}, expected {self.shots}"
            )
        if any(v < 0 for v in self.counts.values()):
            raise InvalidDistribution("counts must be nonnegative")

    def frequencies(self, d: int) -> np.ndarray:
        labels = outcome_labels(self.basis, d)
        return np.array([self.counts.get(l, 0) for l in labels], dtype=float) / self.shots


def sample_counts(probabilities: np.ndarray, shots: int, seed: int,
                  basis: str = "computational", labels=None) -> MeasurementCounts:
    """Multinomial outcome draw via inverse-CDF with a counter-based generator."""
    p = np.asarray(probabilities, dtype=float)
    if shots < 1:
        raise InvalidDistribution("shots must be >= 1")
    if np.any(p < -1e-8) or abs(p.sum() - 1.0) > 1e-8:
        raise InvalidDistribution("invalid probability vector")
    p = np.clip(p, 0.0, None)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    rng = np.random.Generator(np.random.Philox(seed))
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    hist = np.bincount(draws, minlength=len(p))
    if labels is None:
        d = int(round(np.sqrt(len(p))))
        labels = outcome_labels(basis, d) if d * d == len(p) else list(range(len(p)))
    counts = {label: int(c) for label, c in zip(labels, hist)}
    return MeasurementCounts(basis, counts, shots)
