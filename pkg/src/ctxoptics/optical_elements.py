"""Half-wave plates, polarizing beam splitters and relabelings as mode unitaries.

Conventions
-----------
* HWP at angle ``theta`` (radians): ``H -> cos(2 theta) H + sin(2 theta) V`` and
  ``V -> -sin(2 theta) H + cos(2 theta) V``. This is a rotation by ``2 theta``; at
  ``theta = 0`` it is the identity (not the textbook ``diag(1, -1)`` Jones matrix).
* PBS between paths ``A`` and ``B``: H stays on its path, V swaps paths. The
  reflection amplitude is :data:`PBS_REFLECTION_PHASE`.
* Unused input ports are ordinary modes of the basis fed with vacuum.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from functools import reduce
from typing import Union

import numpy as np

from .mode_calculus import (
    ModeBasis,
    ModeLabel,
    Polarization,
    UnitaryMap,
    as_label_sequence,
    compose,
    permutation_map,
)

# Amplitude picked up by the reflected (V) component. Any fixed unit-modulus
# value cancels in the click projectors; +1 keeps every PBS a permutation.
PBS_REFLECTION_PHASE = 1.0

H, V = Polarization.H, Polarization.V


def hwp_matrix(theta: float) -> np.ndarray:
    """2x2 HWP block on ``(H, V)``, column convention."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"HWP angle must be finite, got {theta!r}")
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def pbs_matrix(path_a: str, path_b: str) -> np.ndarray:
    """4x4 PBS on ``(A.H, A.V, B.H, B.V)``."""
    if path_a == path_b:
        raise ValueError(f"PBS needs two distinct paths, got {path_a!r} twice")
    r = PBS_REFLECTION_PHASE
    return np.array(
        [
            [1, 0, 0, 0],
            [0, 0, 0, r],
            [0, 0, 1, 0],
            [0, r, 0, 0],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class HWP:
    path: str
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError(f"HWP angle must be finite, got {self.theta!r}")
        object.__setattr__(self, "theta", float(self.theta))


@dataclass(frozen=True)
class PBS:
    path_a: str
    path_b: str

    def __post_init__(self):
        if self.path_a == self.path_b:
            raise ValueError(f"PBS needs two distinct paths, got {self.path_a!r} twice")


@dataclass(frozen=True)
class Relabel:
    """Mode permutation; ``mapping`` holds ``(source, image)`` pairs, others fixed."""

    mapping: tuple[tuple[ModeLabel, ModeLabel], ...]

    def __post_init__(self):
        items = self.mapping.items() if isinstance(self.mapping, Mapping) else self.mapping
        pairs = tuple((ModeLabel.parse(a) if isinstance(a, str) else a,
                       ModeLabel.parse(b) if isinstance(b, str) else b) for a, b in items)
        sources = [a for a, _ in pairs]
        if len(set(sources)) != len(sources):
            raise ValueError("relabel lists a source mode more than once")
        # Bijectivity on the touched set; the full-basis check happens on embedding.
        if set(sources) != {b for _, b in pairs}:
            raise ValueError("relabel is not a bijection: sources and images differ")
        object.__setattr__(self, "mapping", pairs)

    @classmethod
    def swap(cls, a, b) -> Relabel:
        return cls({a: b, b: a})

    def as_dict(self) -> dict[ModeLabel, ModeLabel]:
        return dict(self.mapping)


ElementSpec = Union[HWP, PBS, Relabel]


def _require_path(basis: ModeBasis, path: str) -> None:
    for pol in (H, V):
        if ModeLabel(path, pol) not in basis.index:
            raise KeyError(f"element references path {path!r} which is not in the basis")


def element_to_unitary(element: ElementSpec, basis: ModeBasis) -> UnitaryMap:
    """Embed a local element into ``basis``; identity on untouched modes."""
    if isinstance(element, Relabel):
        return permutation_map(basis, element.as_dict())
    if isinstance(element, HWP):
        paths, block = [element.path], hwp_matrix(element.theta)
    elif isinstance(element, PBS):
        paths, block = [element.path_a, element.path_b], pbs_matrix(element.path_a, element.path_b)
    else:
        raise TypeError(f"unknown element type: {type(element).__name__}")
    for p in paths:
        _require_path(basis, p)
    idx = [basis.index[ModeLabel(p, pol)] for p in paths for pol in (H, V)]
    mat = np.eye(len(basis), dtype=complex)
    mat[np.ix_(idx, idx)] = block
    return UnitaryMap(basis, mat)


@dataclass(frozen=True)
class NetworkSpec:
    """A mode transformer: elements applied in list order, plus detector wiring.

    ``logical_inputs`` names the three modes that carry logical modes 0, 1, 2;
    every other basis mode is vacuum-fed.
    """

    basis: ModeBasis
    elements: tuple[ElementSpec, ...]
    detectors: Mapping[str, ModeLabel]
    logical_inputs: tuple[ModeLabel, ModeLabel, ModeLabel]

    def __post_init__(self):
        elements = tuple(self.elements)
        logical = as_label_sequence(self.logical_inputs)
        detectors = {str(k): (ModeLabel.parse(v) if isinstance(v, str) else v)
                     for k, v in dict(self.detectors).items()}
        if len(logical) != 3:
            raise ValueError(f"exactly 3 logical inputs required, got {len(logical)}")
        if len(set(logical)) != 3:
            raise ValueError(f"logical inputs must be distinct: {[str(x) for x in logical]}")
        for lab in logical:
            if lab not in self.basis.index:
                raise KeyError(f"logical input {lab} is not in the basis")
        for name, lab in detectors.items():
            if lab not in self.basis.index:
                raise KeyError(f"detector {name!r} watches mode {lab} which is not in the basis")
        if len(set(detectors.values())) != len(detectors):
            raise ValueError("two detectors share an output mode")
        for el in elements:
            if isinstance(el, HWP):
                _require_path(self.basis, el.path)
            elif isinstance(el, PBS):
                _require_path(self.basis, el.path_a)
                _require_path(self.basis, el.path_b)
            elif isinstance(el, Relabel):
                permutation_map(self.basis, el.as_dict())
            else:
                raise TypeError(f"unknown element type: {type(el).__name__}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "logical_inputs", logical)
        object.__setattr__(self, "detectors", detectors)

    @property
    def logical_positions(self) -> list[int]:
        return [self.basis.index[lab] for lab in self.logical_inputs]

    def replace(self, **changes) -> NetworkSpec:
        kw = dict(basis=self.basis, elements=self.elements,
                  detectors=self.detectors, logical_inputs=self.logical_inputs)
        kw.update(changes)
        return NetworkSpec(**kw)


def network_unitary(net: NetworkSpec) -> UnitaryMap:
    """Composite unitary of ``net.elements`` applied left to right."""
    maps = [element_to_unitary(el, net.basis) for el in net.elements]
    return reduce(compose, maps, UnitaryMap.identity(net.basis))
