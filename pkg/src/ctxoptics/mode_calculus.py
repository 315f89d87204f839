"""Complex linear algebra over labeled optical modes.

A mode is a (spatial path, polarization) pair. Maps follow the column
convention: column ``k`` of a :class:`UnitaryMap` matrix is the image of basis
mode ``k``, so ``H -> cos(2t) H + sin(2t) V`` is read off the first column of a
half-wave-plate block.
"""
from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

UNITARY_TOL = 1e-12


class Polarization(str, enum.Enum):
    H = "H"
    V = "V"


class BasisMismatchError(ValueError):
    """Two operands live on different mode bases."""


class NotUnitaryError(ValueError):
    """Matrix failed the unitarity check at construction."""


@dataclass(frozen=True, order=True)
class ModeLabel:
    path: str
    polarization: Polarization

    def __post_init__(self):
        if not isinstance(self.path, str) or not self.path:
            raise ValueError(f"path must be a non-empty string, got {self.path!r}")
        if "." in self.path:
            raise ValueError(f"path name may not contain '.': {self.path!r}")
        object.__setattr__(self, "polarization", Polarization(self.polarization))

    @classmethod
    def parse(cls, text: str) -> ModeLabel:
        """Parse ``"path.H"`` / ``"path.V"``."""
        path, sep, pol = str(text).rpartition(".")
        if not sep or pol not in ("H", "V"):
            raise ValueError(f"mode label must look like 'path.H' or 'path.V', got {text!r}")
        return cls(path, Polarization(pol))

    def __str__(self) -> str:
        return f"{self.path}.{self.polarization.value}"


def _as_label(x) -> ModeLabel:
    return x if isinstance(x, ModeLabel) else ModeLabel.parse(x)


@dataclass(frozen=True)
class ModeBasis:
    """Ordered, duplicate-free collection of mode labels."""

    labels: tuple[ModeLabel, ...]
    index: Mapping[ModeLabel, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(_as_label(x) for x in self.labels)
        index = {lab: i for i, lab in enumerate(labels)}
        if len(index) != len(labels):
            seen, dups = set(), []
            for lab in labels:
                if lab in seen:
                    dups.append(str(lab))
                seen.add(lab)
            raise ValueError(f"duplicate mode labels in basis: {dups}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "index", index)

    @classmethod
    def from_paths(cls, paths: Iterable[str]) -> ModeBasis:
        """Basis ``p.H, p.V`` for each path in order."""
        return cls(tuple(ModeLabel(p, pol) for p in paths for pol in Polarization))

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(lab.path for lab in self.labels))

    def position(self, label) -> int:
        label = _as_label(label)
        try:
            return self.index[label]
        except KeyError:
            raise KeyError(f"mode {label} is not in the basis") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return _as_label(label) in self.index

    def __str__(self) -> str:
        return "[" + ", ".join(map(str, self.labels)) + "]"


def _frozen_array(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def _check_basis(a: ModeBasis, b: ModeBasis) -> None:
    if a != b:
        raise BasisMismatchError(f"basis mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class AmplitudeVector:
    """Field amplitudes on a mode basis; intensity is the squared modulus."""

    basis: ModeBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen_array(self.amplitudes)
        if amps.shape != (len(self.basis),):
            raise ValueError(
                f"expected {len(self.basis)} amplitudes for basis {self.basis}, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def unit(cls, basis: ModeBasis, label, amplitude: complex = 1.0) -> AmplitudeVector:
        amps = np.zeros(len(basis), dtype=complex)
        amps[basis.position(label)] = amplitude
        return cls(basis, amps)

    def __getitem__(self, label) -> complex:
        return complex(self.amplitudes[self.basis.position(label)])

    def scale(self, factor: complex) -> AmplitudeVector:
        return AmplitudeVector(self.basis, factor * self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def intensities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def allclose(self, other: AmplitudeVector, atol: float = UNITARY_TOL) -> bool:
        _check_basis(self.basis, other.basis)
        return bool(np.max(np.abs(self.amplitudes - other.amplitudes), initial=0.0) <= atol)

    def __eq__(self, other):
        if not isinstance(other, AmplitudeVector):
            return NotImplemented
        return self.basis == other.basis and np.array_equal(self.amplitudes, other.amplitudes)


def unitarity_defect(matrix: np.ndarray) -> float:
    """``max |U^dagger U - I|`` entrywise."""
    m = np.asarray(matrix)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0))


@dataclass(frozen=True, eq=False)
class UnitaryMap:
    """Unitary acting on a mode basis, validated at construction."""

    basis: ModeBasis
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen_array(self.matrix)
        n = len(self.basis)
        if mat.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix for basis {self.basis}, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise NotUnitaryError("matrix has non-finite entries")
        defect = unitarity_defect(mat)
        if defect > UNITARY_TOL:
            raise NotUnitaryError(f"matrix is not unitary: max|U^dagger U - I| = {defect:.3e}")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, basis: ModeBasis) -> UnitaryMap:
        return cls(basis, np.eye(len(basis), dtype=complex))

    def dagger(self) -> UnitaryMap:
        return UnitaryMap(self.basis, self.matrix.conj().T)

    def entry(self, out_label, in_label) -> complex:
        """Amplitude transferred from ``in_label`` into ``out_label``."""
        return complex(self.matrix[self.basis.position(out_label), self.basis.position(in_label)])

    def allclose(self, other: UnitaryMap, atol: float = UNITARY_TOL) -> bool:
        _check_basis(self.basis, other.basis)
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= atol)

    def __eq__(self, other):
        if not isinstance(other, UnitaryMap):
            return NotImplemented
        return self.basis == other.basis and np.array_equal(self.matrix, other.matrix)


def compose(first: UnitaryMap, second: UnitaryMap) -> UnitaryMap:
    """Map that applies ``first`` and then ``second``."""
    _check_basis(first.basis, second.basis)
    return UnitaryMap(first.basis, second.matrix @ first.matrix)


def apply(umap: UnitaryMap, state: AmplitudeVector) -> AmplitudeVector:
    _check_basis(umap.basis, state.basis)
    return AmplitudeVector(umap.basis, umap.matrix @ state.amplitudes)


def permutation_map(basis: ModeBasis, relabel: Mapping) -> UnitaryMap:
    """Permutation sending mode ``l`` to ``relabel[l]``.

    Labels absent from ``relabel`` are fixed. The completed map must be a
    bijection on the basis.
    """
    moves: dict[ModeLabel, ModeLabel] = {}
    for src, dst in relabel.items():
        src, dst = _as_label(src), _as_label(dst)
        for lab in (src, dst):
            if lab not in basis.index:
                raise KeyError(f"relabel references mode {lab} which is not in the basis")
        moves[src] = dst
    images = [moves.get(lab, lab) for lab in basis.labels]
    if len(set(images)) != len(images):
        clashes = sorted({str(x) for x in images if images.count(x) > 1})
        raise ValueError(f"relabel is not a bijection; modes hit more than once: {clashes}")
    mat = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, img in enumerate(images):
        mat[basis.index[img], col] = 1.0
    return UnitaryMap(basis, mat)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``n x n`` unitary (QR of a complex Ginibre matrix)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def as_label_sequence(labels: Sequence) -> tuple[ModeLabel, ...]:
    return tuple(_as_label(x) for x in labels)
