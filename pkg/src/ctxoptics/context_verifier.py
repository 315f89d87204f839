"""Numerical certificates for shared observables, relabeling and linearity.

All comparisons are made between click projectors, which are blind to the
global phases different element orderings can introduce.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .mode_calculus import AmplitudeVector, ModeLabel, apply
from .observable_extraction import DEFAULT_TOL, LeakageError, extract_projector
from .optical_elements import NetworkSpec, Relabel, network_unitary


class ContextError(ValueError):
    pass


@dataclass(frozen=True)
class ContextPair:
    """Two measurement configurations that should share one detector's observable."""

    net_left: NetworkSpec
    net_right: NetworkSpec
    shared_detector: str

    def __post_init__(self):
        if self.net_left.basis != self.net_right.basis:
            raise ContextError("networks in a context pair must share the same mode basis")
        if self.net_left.logical_inputs != self.net_right.logical_inputs:
            raise ContextError("networks in a context pair must share logical inputs")
        for side, net in (("left", self.net_left), ("right", self.net_right)):
            if self.shared_detector not in net.detectors:
                raise ContextError(f"shared detector {self.shared_detector!r} missing from {side} network")


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    deviation: float
    tolerance: float
    detail: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _extract(net: NetworkSpec, detector: str, which: str):
    try:
        return extract_projector(net, detector)
    except LeakageError as exc:
        raise LeakageError(f"{which}:{exc.detector}", exc.leakage) from exc


def verify_shared_observable(pair: ContextPair, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check the shared detector measures the same projector in both networks."""
    det = pair.shared_detector
    p_left = _extract(pair.net_left, det, "left")
    p_right = _extract(pair.net_right, det, "right")
    dev = p_left.distance(p_right)
    return VerificationReport(dev <= tol, dev, tol, {det: dev})


def _logical_sigma(net: NetworkSpec, relabel) -> dict[int, int]:
    """Normalize a logical relabeling to ``{index: index}`` over 0, 1, 2."""
    if isinstance(relabel, Relabel):
        relabel = relabel.as_dict()
    pos = {lab: k for k, lab in enumerate(net.logical_inputs)}
    sigma: dict[int, int] = {}
    for src, dst in dict(relabel).items():
        src = ModeLabel.parse(src) if isinstance(src, str) else src
        dst = ModeLabel.parse(dst) if isinstance(dst, str) else dst
        try:
            s = pos[src] if not isinstance(src, (int, np.integer)) else int(src)
            d = pos[dst] if not isinstance(dst, (int, np.integer)) else int(dst)
        except KeyError as exc:
            raise ValueError(f"relabel touches {exc.args[0]} which is not a logical input") from None
        if s not in (0, 1, 2) or d not in (0, 1, 2):
            raise ValueError(f"logical mode indices must be 0, 1 or 2, got {src!r} -> {dst!r}")
        if s in sigma:
            raise ValueError(f"logical mode {s} mapped twice")
        sigma[s] = d
    full = {k: sigma.get(k, k) for k in range(3)}
    if sorted(full.values()) != [0, 1, 2]:
        raise ValueError(f"relabel is not a bijection on logical modes: {full}")
    return full


def logical_permutation_matrix(sigma: Mapping[int, int]) -> np.ndarray:
    """3x3 matrix ``S`` with ``S|k> = |sigma(k)>``."""
    s = np.zeros((3, 3))
    for k, img in sigma.items():
        s[img, k] = 1.0
    return s


def relabel_network(net: NetworkSpec, relabel) -> NetworkSpec:
    """Network whose logical mode ``k`` is first routed onto the mode of ``sigma(k)``.

    The permutation is prepended as a :class:`Relabel` element; the logical
    input labels themselves are kept, so index ``k`` now names the physical
    port that feeds what used to be logical mode ``sigma(k)``.
    """
    sigma = _logical_sigma(net, relabel)
    lab = net.logical_inputs
    moves = {lab[k]: lab[img] for k, img in sigma.items() if k != img}
    elements = ((Relabel(moves),) if moves else ()) + net.elements
    return net.replace(elements=elements)


def verify_relabel_equivalence(
    net: NetworkSpec, relabel, tol: float = DEFAULT_TOL, conjugate: bool = True
) -> VerificationReport:
    """Check every detector measures the same observable after relabeling.

    With ``sigma`` the logical permutation and ``S`` its matrix, the relabeled
    projector satisfies ``S P' S^dagger = P``. ``conjugate=False`` compares
    ``P'`` to ``P`` directly, which is the negative control.
    """
    sigma = _logical_sigma(net, relabel)
    s = logical_permutation_matrix(sigma)
    relabeled = relabel_network(net, sigma)
    detail: dict[str, float] = {}
    for name in net.detectors:
        p = _extract(net, name, "original").matrix
        q = _extract(relabeled, name, "relabeled").matrix
        if conjugate:
            q = s @ q @ s.conj().T
        detail[name] = float(np.max(np.abs(q - p)))
    dev = max(detail.values(), default=0.0)
    return VerificationReport(dev <= tol, dev, tol,
                              {"sigma": {str(k): v for k, v in sigma.items()}, "detectors": detail})


def linearity_check(
    net: NetworkSpec,
    trials: int = 100,
    tol: float = 1e-12,
    seed: int = 0,
    scalars=None,
) -> VerificationReport:
    """Scaling the input field scales the output field by the same factor.

    Each trial draws a random input state ``v`` and a complex ``lam`` (or takes
    ``scalars`` in turn), checks ``U(lam v) = lam U(v)``, and checks that the
    brightest detector stays the brightest when ``v`` is scaled by ``|lam| > 0``.
    A ranking change is reported as infinite deviation.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    umap = network_unitary(net)
    dim = len(net.basis)
    det_pos = [net.basis.index[m] for m in net.detectors.values()]
    worst = 0.0
    argmax_flips = 0
    for t in range(trials):
        v = AmplitudeVector(net.basis, rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
        if scalars is not None:
            lam = complex(scalars[t % len(scalars)])
        else:
            lam = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        out = apply(umap, v)
        scaled_out = apply(umap, v.scale(lam))
        err = float(np.max(np.abs(scaled_out.amplitudes - lam * out.amplitudes)))
        worst = max(worst, err)
        real_lam = abs(lam)
        if det_pos and real_lam > 0:
            base = out.intensities()[det_pos]
            scaled = apply(umap, v.scale(real_lam)).intensities()[det_pos]
            if int(np.argmax(base)) != int(np.argmax(scaled)):
                argmax_flips += 1
    if argmax_flips:
        # Ranking failures have no finite amplitude deviation.
        worst = float("inf")
    return VerificationReport(worst <= tol, worst, tol, {"trials": trials, "argmax_flips": argmax_flips})
