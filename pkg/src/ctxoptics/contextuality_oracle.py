"""Noncontextuality inequalities over rank-1 qutrit observables.

An inequality is a linear form ``sum_i c_i <A_i> + sum_(i,j) c_ij <A_i A_j>``
over the vertices and edges of a compatibility graph. The classical bound is
found by exhaustive search over deterministic +/-1 assignments in exact integer
arithmetic; the quantum value uses ``A_i = I - 2|r_i><r_i|``.
"""
from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels
from .mode_calculus import UNITARY_TOL
from .observable_extraction import DEFAULT_TOL

MAX_ENUMERATION_VERTICES = 30
DEFAULT_SEED = 20111220
BUNDLED_INEQUALITY = "yu_oh_13.json"


class EnumerationTooLargeError(ValueError):
    pass


class IllDefinedExpressionError(ValueError):
    """An edge term pairs observables that do not commute."""


class InvalidStateError(ValueError):
    pass


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, ``"a/b"`` string or float (via its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"coefficient must be finite, got {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact coefficient")


@dataclass(frozen=True, eq=False)
class RaySet:
    """Unit vectors in C^3 (logical modes 0, 1, 2) with names."""

    rays: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        r = np.array(self.rays, dtype=complex, copy=True)
        if r.ndim != 2 or r.shape[1] != 3:
            raise ValueError(f"rays must have shape (n, 3), got {r.shape}")
        norms = np.linalg.norm(r, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNITARY_TOL)
        if bad.size:
            raise ValueError(f"rays {bad.tolist()} are not normalized (norms {norms[bad].tolist()})")
        names = tuple(self.names) if self.names else tuple(f"r{i}" for i in range(len(r)))
        if len(names) != len(r):
            raise ValueError(f"{len(names)} names for {len(r)} rays")
        r.flags.writeable = False
        object.__setattr__(self, "rays", r)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_unnormalized(cls, vectors, names=()) -> RaySet:
        v = np.asarray(vectors, dtype=complex)
        return cls(v / np.linalg.norm(v, axis=1, keepdims=True), names)

    def __len__(self) -> int:
        return len(self.rays)

    def projector(self, i: int) -> np.ndarray:
        return np.outer(self.rays[i], self.rays[i].conj())

    def observable(self, i: int) -> np.ndarray:
        return np.eye(3) - 2 * self.projector(i)


@dataclass(frozen=True)
class CompatibilityGraph:
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) references a vertex outside 0..{self.n - 1}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degree(self, i: int) -> int:
        return sum(i in e for e in self.edges)


@dataclass(frozen=True)
class InequalityExpression:
    """Exact coefficients of ``<A_i>`` and ``<A_i A_j>`` terms.

    ``edge_coeffs`` is keyed by unordered pairs ``(i, j)`` with ``i < j``.
    """

    vertex_coeffs: tuple[Fraction, ...]
    edge_coeffs: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        vc = tuple(as_fraction(c) for c in self.vertex_coeffs)
        ec: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in dict(self.edge_coeffs).items():
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"edge term on a single vertex ({i}, {j})")
            key = (min(i, j), max(i, j))
            ec[key] = ec.get(key, Fraction(0)) + as_fraction(c)
            if not (0 <= key[0] and key[1] < len(vc)):
                raise ValueError(f"edge {key} references a vertex outside 0..{len(vc) - 1}")
        object.__setattr__(self, "vertex_coeffs", vc)
        object.__setattr__(self, "edge_coeffs", dict(sorted(ec.items())))

    @property
    def n(self) -> int:
        return len(self.vertex_coeffs)

    @classmethod
    def uniform(cls, graph: CompatibilityGraph, vertex_coeff, edge_coeff) -> InequalityExpression:
        return cls(
            tuple(as_fraction(vertex_coeff) for _ in range(graph.n)),
            {e: as_fraction(edge_coeff) for e in graph.sorted_edges()},
        )

    def check_graph(self, graph: CompatibilityGraph) -> None:
        if graph.n != self.n:
            raise ValueError(f"expression has {self.n} vertices, graph has {graph.n}")
        extra = [e for e in self.edge_coeffs if e not in graph.edges]
        if extra:
            raise ValueError(f"edge terms {extra} are not edges of the compatibility graph")

    def negated(self) -> InequalityExpression:
        return InequalityExpression(tuple(-c for c in self.vertex_coeffs),
                                    {e: -c for e, c in self.edge_coeffs.items()})

    def evaluate(self, assignment: Sequence[int]) -> Fraction:
        """Exact value at a +/-1 assignment."""
        a = list(assignment)
        if len(a) != self.n or any(x not in (1, -1) for x in a):
            raise ValueError("assignment must be a +/-1 vector of the expression's length")
        total = sum((c * a[i] for i, c in enumerate(self.vertex_coeffs)), Fraction(0))
        total += sum((c * a[i] * a[j] for (i, j), c in self.edge_coeffs.items()), Fraction(0))
        return total

    def scale_to_integers(self, scale: int | None = None) -> tuple[int, list[int], dict[tuple[int, int], int]]:
        """``(scale, vertex ints, edge ints)`` with every coefficient times ``scale`` integral.

        ``scale`` defaults to the lcm of the coefficient denominators.
        """
        coeffs = list(self.vertex_coeffs) + list(self.edge_coeffs.values())
        if scale is None:
            scale = math.lcm(*(c.denominator for c in coeffs)) if coeffs else 1
        elif scale < 1 or any((c * scale).denominator != 1 for c in coeffs):
            raise ValueError(f"scale {scale} does not make every coefficient an integer")
        vi = [int(c * scale) for c in self.vertex_coeffs]
        ei = {e: int(c * scale) for e, c in self.edge_coeffs.items()}
        return scale, vi, ei


@dataclass(frozen=True)
class InequalityReport:
    classical_bound: Fraction
    maximizing_assignment: tuple[int, ...]
    quantum_value: float
    violation: float
    scale: int = 1

    def to_dict(self) -> dict:
        return {
            "classical_bound": str(self.classical_bound),
            "classical_bound_float": float(self.classical_bound),
            "maximizing_assignment": list(self.maximizing_assignment),
            "quantum_value": self.quantum_value,
            "violation": self.violation,
            "integer_scale": self.scale,
        }


def orthogonality_graph(rays: RaySet, tol: float = DEFAULT_TOL) -> CompatibilityGraph:
    """Edge ``(i, j)`` iff ``|<r_i|r_j>| <= tol``."""
    gram = np.abs(rays.rays.conj() @ rays.rays.T)
    i, j = np.nonzero(np.triu(gram <= tol, k=1))
    return CompatibilityGraph(len(rays), frozenset(zip(i.tolist(), j.tolist())))


def index_to_assignment(k: int, n: int) -> tuple[int, ...]:
    return tuple(-1 if (k >> i) & 1 else 1 for i in range(n))


def _csr(n: int, edges: Mapping[tuple[int, int], int]):
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for (i, j), w in edges.items():
        if w:
            adj[i].append((j, w))
            adj[j].append((i, w))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    nbr = np.array([j for a in adj for j, _ in a], dtype=np.int64)
    wt = np.array([w for a in adj for _, w in a], dtype=np.int64)
    return indptr, nbr, wt


def classical_bound_bruteforce(
    expr: InequalityExpression,
    graph: CompatibilityGraph | None = None,
    workers: int = 1,
    kernel: str | None = None,
    scale: int | None = None,
) -> tuple[Fraction, tuple[int, ...]]:
    """Exact maximum over all ``2**n`` deterministic +/-1 assignments.

    Coefficients are multiplied by ``scale`` (default: lcm of their
    denominators) so the search runs in exact int64 arithmetic. The assignment
    space is split into ``2**p`` blocks by its top bits; ties resolve to the
    smallest assignment index (bit ``i`` set means ``a_i = -1``), so the result
    does not depend on ``workers``.
    """
    if graph is not None:
        expr.check_graph(graph)
    n = expr.n
    if n > MAX_ENUMERATION_VERTICES:
        raise EnumerationTooLargeError(
            f"refusing to enumerate 2**{n} assignments; at most {MAX_ENUMERATION_VERTICES} vertices supported"
        )
    if n == 0:
        return Fraction(0), ()
    scale, vi, ei = expr.scale_to_integers(scale)
    if sum(map(abs, vi)) + sum(map(abs, ei.values())) >= 2**62:
        raise OverflowError("scaled coefficients are too large for int64 enumeration")
    vertex = np.array(vi, dtype=np.int64)
    indptr, nbr, wt = _csr(n, ei)
    fn = _kernels.get_kernel(kernel)

    workers = max(1, int(workers))
    pbits = min(n, max(0, (4 * workers - 1).bit_length())) if workers > 1 else 0
    nlow = n - pbits
    blocks = range(1 << pbits)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda pre: fn(vertex, indptr, nbr, wt, nlow, pre), blocks))
    else:
        results = [fn(vertex, indptr, nbr, wt, nlow, pre) for pre in blocks]
    best_val, best_idx = max(results, key=lambda r: (r[0], -r[1]))
    bound = Fraction(best_val, scale)
    assignment = index_to_assignment(best_idx, n)
    return bound, assignment


def classical_range(expr: InequalityExpression, graph=None, **kw) -> tuple[Fraction, Fraction]:
    """``(min, max)`` of the expression over deterministic assignments."""
    hi, _ = classical_bound_bruteforce(expr, graph, **kw)
    neg_hi, _ = classical_bound_bruteforce(expr.negated(), graph, **kw)
    return -neg_hi, hi


def as_density_matrix(state) -> np.ndarray:
    """Density matrix from a 3-vector (pure state) or a 3x3 matrix, validated."""
    s = np.asarray(state, dtype=complex)
    if s.shape == (3,):
        norm = np.linalg.norm(s)
        if abs(norm - 1.0) > DEFAULT_TOL:
            raise InvalidStateError(f"pure state has norm {norm!r}, expected 1")
        s = np.outer(s, s.conj())
    if s.shape != (3, 3):
        raise InvalidStateError(f"state must be a 3-vector or 3x3 matrix, got shape {s.shape}")
    if np.max(np.abs(s - s.conj().T)) > DEFAULT_TOL:
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(s).real
    if abs(tr - 1.0) > DEFAULT_TOL:
        raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
    if np.linalg.eigvalsh((s + s.conj().T) / 2).min() < -DEFAULT_TOL:
        raise InvalidStateError("density matrix is not positive semidefinite")
    return s


def inequality_operator(expr: InequalityExpression, rays: RaySet, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Operator ``sum c_i A_i + sum c_ij A_i A_j`` on the logical modes."""
    if len(rays) != expr.n:
        raise ValueError(f"expression has {expr.n} vertices but {len(rays)} rays were given")
    obs = [rays.observable(i) for i in range(expr.n)]
    op = np.zeros((3, 3), dtype=complex)
    for i, c in enumerate(expr.vertex_coeffs):
        op += float(c) * obs[i]
    for (i, j), c in expr.edge_coeffs.items():
        prod = obs[i] @ obs[j]
        defect = float(np.max(np.abs(prod - obs[j] @ obs[i])))
        if defect > tol:
            raise IllDefinedExpressionError(
                f"edge ({rays.names[i]}, {rays.names[j]}) pairs non-commuting observables "
                f"(|[A_i, A_j]| = {defect:.3e})"
            )
        op += float(c) * prod
    return op


def quantum_value(expr: InequalityExpression, rays: RaySet, state) -> float:
    rho = as_density_matrix(state)
    return float(np.trace(rho @ inequality_operator(expr, rays)).real)


def random_pure_states(n_states: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Haar-random pure qutrit states, shape ``(n_states, 3)``."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_states, 3)) + 1j * rng.standard_normal((n_states, 3))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class ScanResult:
    min: float
    max: float
    spread: float
    values: tuple[float, ...]


def state_independence_scan(
    expr: InequalityExpression, rays: RaySet, n_states: int = 100, seed: int = DEFAULT_SEED
) -> ScanResult:
    """Quantum value over ``n_states`` random pure states, then the maximally mixed state."""
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    op = inequality_operator(expr, rays)
    values = [float(np.real(psi.conj() @ op @ psi)) for psi in random_pure_states(n_states, seed)]
    values.append(float(np.trace(op).real / 3))
    lo, hi = min(values), max(values)
    return ScanResult(lo, hi, hi - lo, tuple(values))


def evaluate_inequality(
    expr: InequalityExpression,
    rays: RaySet,
    state=None,
    graph: CompatibilityGraph | None = None,
    workers: int = 1,
) -> InequalityReport:
    """Classical bound plus the quantum value (default: maximally mixed state)."""
    graph = graph if graph is not None else orthogonality_graph(rays)
    bound, assignment = classical_bound_bruteforce(expr, graph, workers=workers)
    rho = np.eye(3) / 3 if state is None else state
    q = quantum_value(expr, rays, rho)
    scale, _, _ = expr.scale_to_integers()
    return InequalityReport(bound, assignment, q, q - float(bound), scale)


# -- dataset files -----------------------------------------------------------

def _parse_component(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex component must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(float(as_fraction(x)))


@dataclass(frozen=True, eq=False)
class InequalityDataset:
    name: str
    rays: RaySet
    graph: CompatibilityGraph
    expression: InequalityExpression
    provenance: str = ""
    document: dict = field(default_factory=dict, repr=False)


def inequality_from_dict(doc: Mapping) -> InequalityDataset:
    """Build rays, graph and expression from the inequality JSON document.

    ``edges: "orthogonality"`` recomputes the graph from the rays; an explicit
    list is cross-checked against the recomputed graph. With
    ``edge_sum: "ordered"`` the edge coefficient applies to both ``(i, j)`` and
    ``(j, i)``, so each unordered edge receives twice the coefficient.
    """
    try:
        ray_doc = doc["rays"]
        vectors = [[_parse_component(c) for c in v] for v in ray_doc["vectors"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"inequality file: missing or malformed field {exc}") from None
    names = tuple(ray_doc.get("names", ()))
    rays = (RaySet.from_unnormalized(vectors, names) if ray_doc.get("normalize", True)
            else RaySet(vectors, names))
    tol = float(doc.get("orthogonality_tol", DEFAULT_TOL))
    graph = orthogonality_graph(rays, tol)
    listed = doc.get("edges", "orthogonality")
    if listed != "orthogonality":
        pos = {nm: i for i, nm in enumerate(rays.names)}
        explicit = CompatibilityGraph(len(rays), frozenset(
            (pos[a] if isinstance(a, str) else int(a), pos[b] if isinstance(b, str) else int(b))
            for a, b in listed))
        if explicit != graph:
            raise ValueError(
                "listed edges disagree with the orthogonality graph recomputed from the rays: "
                f"missing {sorted(graph.edges - explicit.edges)}, extra {sorted(explicit.edges - graph.edges)}"
            )
    vc = doc.get("vertex_coeffs", doc.get("vertex_coeff", 1))
    vertex = [as_fraction(c) for c in vc] if isinstance(vc, list) else [as_fraction(vc)] * len(rays)
    multiplicity = {"ordered": 2, "unordered": 1}.get(doc.get("edge_sum", "unordered"))
    if multiplicity is None:
        raise ValueError(f"edge_sum must be 'ordered' or 'unordered', got {doc.get('edge_sum')!r}")
    edge_coeff = as_fraction(doc.get("edge_coeff", 0))
    expr = InequalityExpression(tuple(vertex),
                                {e: multiplicity * edge_coeff for e in graph.sorted_edges()})
    return InequalityDataset(doc.get("name", ""), rays, graph, expr,
                             doc.get("provenance", ""), dict(doc))


def load_inequality_file(path) -> InequalityDataset:
    with open(path, encoding="utf-8") as fh:
        return inequality_from_dict(json.load(fh))


def bundled_path(name: str = BUNDLED_INEQUALITY) -> Path:
    return Path(str(resources.files("ctxoptics") / "data" / name))


def load_bundled_inequality() -> InequalityDataset:
    """The bundled 13-ray state-independent inequality."""
    return load_inequality_file(bundled_path())
