import math
from functools import reduce

import numpy as np
import pytest

from ctxoptics.mode_calculus import AmplitudeVector, ModeBasis, UnitaryMap, apply, compose, permutation_map
from ctxoptics.optical_elements import (
    HWP,
    PBS,
    NetworkSpec,
    Relabel,
    element_to_unitary,
    hwp_matrix,
    network_unitary,
    pbs_matrix,
)
from netgen import oracle_network_matrix, random_network

TOL = 1e-12
S = 1 / math.sqrt(2)


def literal_hwp(theta):
    """Columns written straight from H -> cH + sV, V -> -sH + cV."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    h_image = np.array([c, s])
    v_image = np.array([-s, c])
    return np.column_stack([h_image, v_image])


@pytest.mark.parametrize(
    "theta, expected",
    [
        (0.0, [[1, 0], [0, 1]]),
        (math.pi / 4, [[0, -1], [1, 0]]),
        (math.pi / 8, [[S, -S], [S, S]]),
    ],
)
def test_hwp_examples(theta, expected):
    np.testing.assert_allclose(hwp_matrix(theta), expected, atol=TOL)


def test_hwp_matches_formula_for_random_angles():
    rng = np.random.default_rng(10)
    for theta in rng.uniform(0, 2 * np.pi, 100):
        m = hwp_matrix(theta)
        assert np.max(np.abs(m - literal_hwp(theta))) <= TOL
        assert np.all(m.imag == 0)


def test_hwp_angles_add():
    rng = np.random.default_rng(11)
    for t1, t2 in rng.uniform(-np.pi, np.pi, (100, 2)):
        assert np.max(np.abs(hwp_matrix(t1) @ hwp_matrix(t2) - hwp_matrix(t1 + t2))) <= TOL


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_hwp_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        hwp_matrix(bad)
    with pytest.raises(ValueError):
        HWP("a", bad)


def test_pbs_routes_h_through_and_reflects_v():
    basis = ModeBasis.from_paths(["A", "B"])
    u = element_to_unitary(PBS("A", "B"), basis)
    out = apply(u, AmplitudeVector.unit(basis, "A.H"))
    assert out == AmplitudeVector.unit(basis, "A.H")
    out = apply(u, AmplitudeVector.unit(basis, "A.V"))
    assert out == AmplitudeVector.unit(basis, "B.V")
    assert apply(u, AmplitudeVector.unit(basis, "B.H")) == AmplitudeVector.unit(basis, "B.H")
    assert apply(u, AmplitudeVector.unit(basis, "B.V")) == AmplitudeVector.unit(basis, "A.V")


def test_pbs_twice_is_identity_and_permutation():
    m = pbs_matrix("A", "B")
    np.testing.assert_array_equal(m @ m, np.eye(4))
    assert sorted(np.abs(m).sum(axis=0)) == [1, 1, 1, 1]
    with pytest.raises(ValueError):
        pbs_matrix("A", "A")
    with pytest.raises(ValueError):
        PBS("A", "A")


def test_embedding_examples():
    basis = ModeBasis.from_paths(["p", "q", "r"])
    assert element_to_unitary(HWP("q", 0.0), basis) == UnitaryMap.identity(basis)
    u = element_to_unitary(HWP("q", math.pi / 8), basis).matrix
    expected = np.eye(6, dtype=complex)
    expected[2:4, 2:4] = [[S, -S], [S, S]]
    np.testing.assert_allclose(u, expected, atol=TOL)
    swap = Relabel.swap("r.H", "p.H")
    assert element_to_unitary(swap, basis) == permutation_map(basis, {"r.H": "p.H", "p.H": "r.H"})


def test_embedding_unknown_path():
    basis = ModeBasis.from_paths(["p"])
    with pytest.raises(KeyError, match="'z'"):
        element_to_unitary(HWP("z", 0.1), basis)


def test_relabel_validation():
    with pytest.raises(ValueError):
        Relabel({"a.H": "b.H"})


def _net(elements, paths=("a", "b")):
    basis = ModeBasis.from_paths(paths)
    return NetworkSpec(basis, tuple(elements), {"D": "a.H"}, ("a.H", "a.V", "b.H"))


def test_network_spec_validation():
    basis = ModeBasis.from_paths(["a", "b"])
    with pytest.raises(ValueError, match="exactly 3"):
        NetworkSpec(basis, (), {}, ("a.H", "a.V"))
    with pytest.raises(ValueError, match="distinct"):
        NetworkSpec(basis, (), {}, ("a.H", "a.H", "b.H"))
    with pytest.raises(ValueError, match="share"):
        NetworkSpec(basis, (), {"X": "a.H", "Y": "a.H"}, ("a.H", "a.V", "b.H"))
    with pytest.raises(KeyError):
        NetworkSpec(basis, (HWP("c", 0.0),), {}, ("a.H", "a.V", "b.H"))


def test_network_examples():
    assert network_unitary(_net([])) == UnitaryMap.identity(_net([]).basis)

    two = network_unitary(_net([HWP("a", math.pi / 8), HWP("a", math.pi / 8)]))
    one = element_to_unitary(HWP("a", math.pi / 4), two.basis)
    assert two.allclose(one)

    net = _net([HWP("a", math.pi / 4), PBS("a", "b")])
    out = apply(network_unitary(net), AmplitudeVector.unit(net.basis, "a.H"))
    assert out.allclose(AmplitudeVector.unit(net.basis, "b.V"))


def test_network_equals_independent_fold():
    rng = np.random.default_rng(12)
    for _ in range(100):
        net = random_network(rng, n_paths=3, n_elements=int(rng.integers(0, 9)))
        u = network_unitary(net).matrix
        assert np.max(np.abs(u - oracle_network_matrix(net))) <= TOL
        maps = [element_to_unitary(e, net.basis) for e in net.elements]
        for m in maps:
            assert isinstance(m, UnitaryMap)
        folded = reduce(lambda acc, m: m.matrix @ acc, maps, np.eye(len(net.basis)))
        assert np.max(np.abs(u - folded)) <= TOL


def test_compose_used_left_to_right():
    net = _net([HWP("a", 0.3), PBS("a", "b"), HWP("b", 1.1)])
    u = network_unitary(net)
    parts = [element_to_unitary(e, net.basis) for e in net.elements]
    assert u.allclose(compose(compose(parts[0], parts[1]), parts[2]))
