"""Detector click projectors expressed on the logical input modes 0, 1, 2.

A detector is a binary black box watching one output mode. Pulling the
output-mode projector back through the network unitary and restricting it to
the logical inputs gives the click projector ``P``; the +/-1 observable uses
``click -> -1`` and ``no click -> +1``, i.e. ``A = I - 2P``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mode_calculus import UNITARY_TOL, ModeLabel
from .optical_elements import NetworkSpec, network_unitary

DEFAULT_TOL = 1e-9
CLICK_VALUE = -1
NO_CLICK_VALUE = +1


class LeakageError(ValueError):
    """The detector mode mixes with vacuum-fed ancilla inputs."""

    def __init__(self, detector: str, leakage: float):
        self.detector = detector
        self.leakage = leakage
        super().__init__(
            f"observable not supported on logical modes: detector {detector!r} "
            f"has leakage norm {leakage:.3e}"
        )


class NotNormalizedError(ValueError):
    pass


def _frozen(m) -> np.ndarray:
    m = np.array(m, dtype=complex, copy=True)
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class Projector:
    """Hermitian idempotent 3x3 matrix on the logical modes."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (3, 3):
            raise ValueError(f"projector must be 3x3, got {m.shape}")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > UNITARY_TOL:
            raise ValueError(f"projector is not Hermitian (defect {herm:.3e})")
        idem = float(np.max(np.abs(m @ m - m)))
        if idem > DEFAULT_TOL:
            raise ValueError(f"projector is not idempotent (defect {idem:.3e})")
        tr = float(np.trace(m).real)
        if abs(tr - round(tr)) > DEFAULT_TOL:
            raise ValueError(f"projector trace {tr} is not an integer")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def onto(cls, vector) -> Projector:
        """Rank-1 projector onto the ray spanned by ``vector``."""
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix).real)))

    def distance(self, other: Projector) -> float:
        """Max-entrywise norm of the difference."""
        return float(np.max(np.abs(self.matrix - other.matrix)))


@dataclass(frozen=True, eq=False)
class Observable:
    projector: Projector

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(3) - 2 * self.projector.matrix


@dataclass(frozen=True)
class DetectorModel:
    """Identical, exchangeable click/no-click detector; only its wiring differs."""

    name: str
    output_mode: ModeLabel


def detector_models(net: NetworkSpec) -> list[DetectorModel]:
    return [DetectorModel(name, mode) for name, mode in net.detectors.items()]


def extract_projector(net: NetworkSpec, detector: str) -> Projector:
    """Click projector of ``detector`` on the logical inputs of ``net``.

    Raises:
        KeyError: unknown detector name.
        LeakageError: the detector also sees vacuum-fed ancilla inputs.
    """
    if detector not in net.detectors:
        raise KeyError(f"no detector named {detector!r}; have {sorted(net.detectors)}")
    u = network_unitary(net).matrix
    row = u[net.basis.index[net.detectors[detector]], net.logical_positions]
    # U^dagger |d><d| U restricted to the logical block.
    block = np.outer(row.conj(), row)
    leakage = float(np.max(np.abs(block @ block - block)))
    if leakage > DEFAULT_TOL:
        raise LeakageError(detector, leakage)
    return Projector(block)


def extract_all(net: NetworkSpec) -> dict[str, Projector]:
    return {name: extract_projector(net, name) for name in net.detectors}


def to_observable(p: Projector) -> Observable:
    return Observable(p)


def _matrix_of(x) -> np.ndarray:
    if isinstance(x, (Observable, Projector)):
        return x.matrix
    return np.asarray(x, dtype=complex)


def commutator_norm(a, b) -> float:
    ma, mb = _matrix_of(a), _matrix_of(b)
    return float(np.max(np.abs(ma @ mb - mb @ ma)))


def commutes(a, b, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Whether ``a`` and ``b`` commute, with ``max |[A, B]|``."""
    norm = commutator_norm(a, b)
    return norm <= tol, norm


def detection_probability(state, p: Projector) -> float:
    """Born-rule click probability ``<psi|P|psi>`` for a normalized logical state."""
    psi = np.asarray(getattr(state, "amplitudes", state), dtype=complex)
    if psi.shape != (3,):
        raise ValueError(f"logical state must have 3 amplitudes, got shape {psi.shape}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > DEFAULT_TOL:
        raise NotNormalizedError(f"state norm is {norm!r}, expected 1")
    prob = float(np.real(psi.conj() @ p.matrix @ psi))
    if -UNITARY_TOL <= prob < 0.0:
        prob = 0.0
    elif 1.0 < prob <= 1.0 + UNITARY_TOL:
        prob = 1.0
    return prob
