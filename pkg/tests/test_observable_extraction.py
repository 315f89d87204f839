import math

import numpy as np
import pytest

from ctxoptics.mode_calculus import ModeBasis
from ctxoptics.observable_extraction import (
    DetectorModel,
    LeakageError,
    NotNormalizedError,
    Projector,
    commutes,
    detection_probability,
    detector_models,
    extract_all,
    extract_projector,
    to_observable,
)
from ctxoptics.optical_elements import HWP, PBS, NetworkSpec, Relabel
from netgen import oracle_projector, random_qutrit_network

BASIS = ModeBasis.from_paths(["a", "b"])
LOGICAL = ("a.H", "a.V", "b.H")


def net(elements, detectors=None):
    return NetworkSpec(BASIS, tuple(elements), detectors or {"D": "a.H"}, LOGICAL)


def literal_rotation(theta):
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, -s], [s, c]])


def test_empty_network_detector_on_mode0():
    p = extract_projector(net([]), "D")
    np.testing.assert_array_equal(p.matrix, np.diag([1, 0, 0]))


@pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 4])
def test_hwp_pulls_back_detector(theta):
    # Oracle: U^dagger|H> is the first row of the 2x2 law, i.e. column 0 of its transpose.
    ray2 = literal_rotation(theta).T[:, 0]
    ray = np.array([ray2[0], ray2[1], 0.0])
    expected = np.outer(ray, ray)
    p = extract_projector(net([HWP("a", theta)]), "D")
    np.testing.assert_allclose(p.matrix, expected, atol=1e-12)


def test_eighth_wave_gives_minus_diagonal_ray():
    p = extract_projector(net([HWP("a", math.pi / 8)]), "D")
    np.testing.assert_allclose(p.matrix, Projector.onto([1, -1, 0]).matrix, atol=1e-12)


def test_quarter_wave_gives_mode1():
    p = extract_projector(net([HWP("a", math.pi / 4)]), "D")
    np.testing.assert_allclose(p.matrix, np.diag([0, 1, 0]), atol=1e-12)


def test_unknown_detector():
    with pytest.raises(KeyError, match="nope"):
        extract_projector(net([]), "nope")


def test_leakage_reported_with_norm():
    # HWP on b mixes logical b.H with vacuum ancilla b.V.
    n = net([HWP("b", math.pi / 8)], {"D": "b.H"})
    with pytest.raises(LeakageError, match="not supported on logical modes") as info:
        extract_projector(n, "D")
    assert info.value.leakage == pytest.approx(0.25, abs=1e-12)


def test_projector_invariants():
    with pytest.raises(ValueError, match="Hermitian"):
        Projector([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
    with pytest.raises(ValueError, match="idempotent"):
        Projector(np.diag([0.5, 0, 0]))
    assert Projector(np.eye(3)).rank == 3


@pytest.mark.parametrize(
    "p, a",
    [
        (np.zeros((3, 3)), np.eye(3)),
        (np.eye(3), -np.eye(3)),
        (np.diag([1, 0, 0]), np.diag([-1, 1, 1])),
    ],
)
def test_to_observable(p, a):
    obs = to_observable(Projector(p))
    np.testing.assert_array_equal(obs.matrix, a)
    np.testing.assert_allclose(obs.matrix @ obs.matrix, np.eye(3), atol=1e-9)


def test_commutes_examples():
    a = to_observable(Projector.onto([0, 1, 1j]))
    ok, norm = commutes(a, a)
    assert ok and norm == 0
    p0, p1 = Projector.onto([1, 0, 0]), Projector.onto([0, 1, 0])
    assert commutes(to_observable(p0), to_observable(p1))[0]
    # Explicit commutator: [P0, P+] = [[0, 1/2], [-1/2, 0]] block, and [A, B] = 4 [P, Q].
    plus = Projector.onto([1, 1, 0])
    comm = p0.matrix @ plus.matrix - plus.matrix @ p0.matrix
    np.testing.assert_allclose(comm, [[0, 0.5, 0], [-0.5, 0, 0], [0, 0, 0]], atol=1e-15)
    ok, norm = commutes(to_observable(p0), to_observable(plus))
    assert not ok
    assert norm == pytest.approx(2.0) and norm > 0.5


def test_detection_probability_examples():
    p = Projector(np.diag([1, 0, 0]))
    assert detection_probability([1, 0, 0], p) == 1
    assert detection_probability([0, 1, 0], p) == 0
    assert detection_probability(np.array([1, 1, 0]) / math.sqrt(2), p) == pytest.approx(0.5)
    with pytest.raises(NotNormalizedError):
        detection_probability([1, 1, 0], p)


def test_detector_models_carry_no_parameters():
    n = net([], {"D1": "a.H", "D2": "b.V"})
    models = detector_models(n)
    assert models == [DetectorModel("D1", n.detectors["D1"]), DetectorModel("D2", n.detectors["D2"])]


def test_projectors_sum_to_identity_on_random_qutrit_networks():
    rng = np.random.default_rng(20)
    for _ in range(100):
        n = random_qutrit_network(rng)
        total = sum(p.matrix for p in extract_all(n).values())
        assert np.max(np.abs(total - np.eye(3))) <= 1e-9


def test_relabel_covariance():
    rng = np.random.default_rng(21)
    for _ in range(50):
        n = random_qutrit_network(rng)
        perm = rng.permutation(3)
        sigma = {k: int(perm[k]) for k in range(3)}
        lab = n.logical_inputs
        moved = n.replace(elements=(Relabel({lab[k]: lab[v] for k, v in sigma.items()}),) + n.elements)
        s = np.zeros((3, 3))
        for k, v in sigma.items():
            s[v, k] = 1
        for name in n.detectors:
            back = s @ extract_projector(moved, name).matrix @ s.T
            assert np.max(np.abs(back - extract_projector(n, name).matrix)) <= 1e-9


def test_detector_exchange_permutes_projectors_only():
    rng = np.random.default_rng(22)
    n = random_qutrit_network(rng, n_paths=2, n_elements=5)
    before = extract_all(n)
    swapped = dict(n.detectors)
    swapped["D0"], swapped["D1"] = n.detectors["D1"], n.detectors["D0"]
    after = extract_all(n.replace(detectors=swapped))
    assert np.array_equal(after["D0"].matrix, before["D1"].matrix)
    assert np.array_equal(after["D1"].matrix, before["D0"].matrix)
    assert np.array_equal(after["D2"].matrix, before["D2"].matrix)


def test_matches_full_conjugation_oracle():
    rng = np.random.default_rng(23)
    for _ in range(200):
        n = random_qutrit_network(rng, n_elements=int(rng.integers(0, 7)))
        for name in n.detectors:
            diff = extract_projector(n, name).matrix - oracle_projector(n, name)
            assert np.max(np.abs(diff)) <= 1e-12


def test_pbs_network_projector():
    # HWP(pi/8) on a, then PBS: a.V content moves to b.V, detector on b.V sees (|0> + |1>)/sqrt2.
    n = net([HWP("a", math.pi / 8), PBS("a", "b")], {"D": "b.V"})
    np.testing.assert_allclose(extract_projector(n, "D").matrix, Projector.onto([1, 1, 0]).matrix,
                               atol=1e-12)
