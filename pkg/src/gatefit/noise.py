"""Noise channels, device-style noise presets and readout-error handling.

Channels are Kraus-operator lists.  The device presets approximate a
three-qubit superconducting register: every gate is applied ideally, then
a depolarizing error on the gate's wires, then thermal relaxation on every
wire for the gate's duration.  Readout errors act on outcome probabilities
through per-qubit confusion matrices; mitigation is linear inversion of
those matrices followed by Euclidean projection onto the probability
simplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .core import _wh_stack

ATOL_CPTP = 1e-10


class InvalidParameters(ValueError):
    """Noise parameters out of their physical range."""


class MitigationUnavailable(ValueError):
    """Readout confusion matrix cannot be inverted."""


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map given by Kraus operators K_i with sum K_i^dag K_i = I."""

    ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(K, dtype=complex) for K in self.ops)
        dim = ops[0].shape[0]
        total = sum(K.conj().T @ K for K in ops)
        if np.max(np.abs(total - np.eye(dim))) > ATOL_CPTP:
            raise InvalidParameters("Kraus operators do not satisfy completeness")
        object.__setattr__(self, "ops", ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(K @ rho @ K.conj().T for K in self.ops)


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),))


def depolarizing_channel(p: float, dim: int) -> KrausChannel:
    """rho -> (1-p) rho + p I/dim, as a Weyl-Heisenberg Kraus mixture."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameters(f"depolarizing probability must be in [0,1], got {p}")
    if p == 0.0:
        return identity_channel(dim)
    stack = _wh_stack(dim)
    n = dim * dim
    ops = [np.sqrt(1.0 - p * (n - 1) / n) * np.eye(dim, dtype=complex)]
    ops.extend(np.sqrt(p / n) * stack[i] for i in range(1, n))
    return KrausChannel(tuple(ops))


def dephasing_channel(p: float) -> KrausChannel:
    """Qubit phase flip: rho -> (1-p) rho + p Z rho Z."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameters(f"dephasing probability must be in [0,1], got {p}")
    Z = np.diag([1.0, -1.0]).astype(complex)
    return KrausChannel((np.sqrt(1 - p) * np.eye(2, dtype=complex), np.sqrt(p) * Z))


def thermal_relaxation_channel(t1: float, t2: float, t: float) -> KrausChannel:
    """Qubit amplitude damping plus dephasing over a duration t (same units).

    Population of |1> decays by exp(-t/t1); coherences decay by exp(-t/t2).
    Requires t2 <= 2*t1, otherwise the residual dephasing is unphysical.
    """
    if t2 > 2.0 * t1:
        raise InvalidParameters(f"T2={t2} exceeds 2*T1={2 * t1}")
    if t < 0:
        raise InvalidParameters("duration must be nonnegative")
    if t == 0.0:
        return identity_channel(2)
    gamma = 1.0 - np.exp(-t / t1)
    # residual coherence decay beyond the sqrt(1-gamma) from damping
    residual = np.exp(-t / t2 + t / (2.0 * t1))
    p_z = (1.0 - residual) / 2.0
    K0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    K1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    ops = [np.sqrt(1 - p_z) * K0, np.sqrt(1 - p_z) * K1]
    if p_z > 0:
        ops.extend([np.sqrt(p_z) * Z @ K0, np.sqrt(p_z) * Z @ K1])
    return KrausChannel(tuple(ops))


def symmetric_confusion(p_flip: float) -> np.ndarray:
    """2x2 readout confusion matrix with equal 0->1 and 1->0 error."""
    if not 0.0 <= p_flip <= 1.0:
        raise InvalidParameters(f"flip probability must be in [0,1], got {p_flip}")
    return np.array([[1.0 - p_flip, p_flip], [p_flip, 1.0 - p_flip]])


def _check_stochastic(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if np.any(M < -1e-12) or np.max(np.abs(M.sum(axis=0) - 1.0)) > 1e-9:
        raise InvalidParameters("confusion matrix columns must be probabilities")
    return M


def apply_readout_confusion(P: np.ndarray, confusions) -> np.ndarray:
    """Noisy outcome distribution M P with M the tensor product of per-qubit matrices.

    ``confusions`` is one matrix per measured qubit, most significant
    outcome digit first; entry M[i, j] is the probability of recording i
    given true outcome j.
    """
    P = np.asarray(P, dtype=float)
    mats = [_check_stochastic(C) for C in confusions]
    M = reduce(np.kron, mats)
    if M.shape[0] != P.shape[0]:
        raise InvalidParameters(
            f"confusion matrices cover {M.shape[0]} outcomes, got {P.shape[0]}"
        )
    return M @ P


def simplex_project(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def mitigate_readout(frequencies: np.ndarray, confusions) -> np.ndarray:
    """Invert the readout confusion on observed frequencies.

    Accepts raw outcome frequencies (counts/shots).  The linear inverse can
    leave the simplex; the result is projected back so downstream code
    always sees a valid distribution.
    """
    freq = np.asarray(frequencies, dtype=float)
    mats = [_check_stochastic(C) for C in confusions]
    M = reduce(np.kron, mats)
    if abs(np.linalg.det(M)) < 1e-12:
        raise MitigationUnavailable("confusion matrix is singular")
    raw = np.linalg.solve(M, freq)
    return simplex_project(raw)


@dataclass(frozen=True)
class NoiseParams:
    """Per-wire noise description for the three-wire estimation circuits.

    Wire order is (target, control 1, control 2).  ``p_cx`` maps a
    (target, control) wire pair to its two-qubit gate error.  ``durations``
    gives gate times in ns for the keys "single", "two" and "measure".
    Relaxation and readout parameters are meaningful for qubit wires only;
    higher-dimensional wires support depolarizing noise alone.
    """

    t1: tuple[float, ...] = (np.inf, np.inf, np.inf)
    t2: tuple[float, ...] = (np.inf, np.inf, np.inf)
    p_sx: tuple[float, ...] = (0.0, 0.0, 0.0)
    p_cx: dict = field(default_factory=dict)
    readout_flip: tuple[float, ...] = (0.0, 0.0, 0.0)
    durations: dict = field(
        default_factory=lambda: {"single": 35.0, "two": 300.0, "measure": 700.0}
    )

    def __post_init__(self):
        for t1, t2 in zip(self.t1, self.t2):
            if t2 > 2.0 * t1:
                raise InvalidParameters(f"T2={t2} exceeds 2*T1={2 * t1}")
        for p in (*self.p_sx, *self.p_cx.values(), *self.readout_flip):
            if not 0.0 <= p <= 1.0:
                raise InvalidParameters(f"error probability {p} out of [0,1]")

    @property
    def noiseless(self) -> bool:
        return (
            all(p == 0 for p in self.p_sx)
            and all(p == 0 for p in self.p_cx.values())
            and all(p == 0 for p in self.readout_flip)
            and all(t == 0 for t in self.durations.values())
        )

    def confusion(self, wire: int) -> np.ndarray:
        return symmetric_confusion(self.readout_flip[wire])

    def relaxes(self) -> bool:
        return any(np.isfinite(t) for t in self.t1) and any(
            t > 0 for t in self.durations.values()
        )


def _zero_durations() -> dict:
    return {"single": 0.0, "two": 0.0, "measure": 0.0}


# Device-style presets.  The "full" set lists measured per-qubit values for
# a three-qubit register with the target on the middle device qubit; the
# uniform sets use the register's worst-case values on every wire.
_T1_FULL = (86632.49, 87499.53, 83654.9)
_T2_FULL = (97533.23, 121657.81, 72867.0)
_PSX_FULL = (0.0004, 0.00045, 0.00027)
_READOUT_FULL = (0.0444, 0.0406, 0.0841)
_PCX_FULL = {(0, 1): 0.01021, (0, 2): 0.00861}

_T1_UNIFORM = (110e3, 110e3, 110e3)
_T2_UNIFORM = (147e3, 147e3, 147e3)


def noise_scenario(name: str) -> NoiseParams:
    """Named noise presets: noiseless, full, cnot-only, full-ideal-cnot."""
    if name == "noiseless":
        return NoiseParams(durations=_zero_durations())
    if name == "full":
        return NoiseParams(
            t1=_T1_FULL,
            t2=_T2_FULL,
            p_sx=_PSX_FULL,
            p_cx=dict(_PCX_FULL),
            readout_flip=_READOUT_FULL,
        )
    if name == "cnot-only":
        return NoiseParams(
            t1=_T1_UNIFORM,
            t2=_T2_UNIFORM,
            p_cx={(0, 1): 0.0142, (0, 2): 0.0142},
            durations=_zero_durations(),
        )
    if name == "full-ideal-cnot":
        return NoiseParams(
            t1=_T1_UNIFORM,
            t2=_T2_UNIFORM,
            p_sx=(0.00045, 0.00045, 0.00045),
            readout_flip=(0.0841, 0.0841, 0.0841),
        )
    raise InvalidParameters(f"unknown noise scenario {name!r}")


SCENARIO_NAMES = ("noiseless", "full", "cnot-only", "full-ideal-cnot")
