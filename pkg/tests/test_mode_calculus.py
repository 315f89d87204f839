import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxoptics.mode_calculus import (
    AmplitudeVector,
    BasisMismatchError,
    ModeBasis,
    ModeLabel,
    NotUnitaryError,
    Polarization,
    UnitaryMap,
    apply,
    compose,
    permutation_map,
    random_unitary,
    unitarity_defect,
)
from ctxoptics.optical_elements import HWP, element_to_unitary

TOL = 1e-12


@pytest.fixture
def basis3():
    return ModeBasis.from_paths(["a", "b", "c"])


@pytest.fixture
def basis_q():
    # logical modes 0, 1, 2 = m.H, m.V, n.H
    return ModeBasis((ModeLabel("m", "H"), ModeLabel("m", "V"), ModeLabel("n", "H")))


def test_label_parse_and_str():
    lab = ModeLabel.parse("arm.V")
    assert lab == ModeLabel("arm", Polarization.V)
    assert str(lab) == "arm.V"
    with pytest.raises(ValueError):
        ModeLabel.parse("arm.X")
    with pytest.raises(ValueError):
        ModeLabel.parse("arm")


def test_basis_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        ModeBasis(("a.H", "a.H"))


def test_basis_index_is_inverse_of_order(basis3):
    for i, lab in enumerate(basis3.labels):
        assert basis3.position(lab) == i
    assert basis3.paths == ("a", "b", "c")
    with pytest.raises(KeyError):
        basis3.position("z.H")


def test_unitary_rejected_at_construction(basis3):
    with pytest.raises(NotUnitaryError):
        UnitaryMap(basis3, 2 * np.eye(6))
    with pytest.raises(ValueError):
        UnitaryMap(basis3, np.eye(5))


def test_values_are_immutable(basis3):
    u = UnitaryMap.identity(basis3)
    with pytest.raises(ValueError):
        u.matrix[0, 0] = 5


def test_compose_identity_and_inverse(basis3):
    u = UnitaryMap(basis3, random_unitary(6, np.random.default_rng(1)))
    eye = UnitaryMap.identity(basis3)
    assert compose(eye, u).allclose(u)
    assert compose(u, u.dagger()).allclose(eye)


def test_compose_order_is_second_after_first(basis3):
    rng = np.random.default_rng(2)
    a = UnitaryMap(basis3, random_unitary(6, rng))
    b = UnitaryMap(basis3, random_unitary(6, rng))
    np.testing.assert_allclose(compose(a, b).matrix, b.matrix @ a.matrix, atol=TOL)


def test_compose_two_eighth_wave_hwps_is_quarter_angle(basis3):
    # Oracle: multiply the HWP-law 2x2 blocks by hand.
    c = math.cos(math.pi / 4)
    r8 = np.array([[c, -c], [c, c]])
    expected_block = r8 @ r8
    u = compose(element_to_unitary(HWP("b", math.pi / 8), basis3),
                element_to_unitary(HWP("b", math.pi / 8), basis3))
    expected = np.eye(6, dtype=complex)
    expected[2:4, 2:4] = expected_block
    np.testing.assert_allclose(u.matrix, expected, atol=TOL)
    np.testing.assert_allclose(expected_block, [[0, -1], [1, 0]], atol=TOL)


def test_compose_basis_mismatch_names_both(basis3):
    other = ModeBasis.from_paths(["x", "y", "z"])
    with pytest.raises(BasisMismatchError, match=r"a\.H.*x\.H"):
        compose(UnitaryMap.identity(basis3), UnitaryMap.identity(other))


def test_apply_examples(basis3):
    v = AmplitudeVector(basis3, np.arange(6) + 1j)
    assert apply(UnitaryMap.identity(basis3), v) == v
    u = UnitaryMap(basis3, random_unitary(6, np.random.default_rng(3)))
    zero = AmplitudeVector(basis3, np.zeros(6))
    assert apply(u, zero) == zero

    out = apply(element_to_unitary(HWP("a", math.pi / 8), basis3), AmplitudeVector.unit(basis3, "a.H"))
    assert out["a.H"] == pytest.approx(1 / math.sqrt(2), abs=TOL)
    assert out["a.V"] == pytest.approx(1 / math.sqrt(2), abs=TOL)
    assert np.all(out.amplitudes[2:] == 0)


def test_apply_basis_mismatch(basis3):
    other = ModeBasis.from_paths(["x", "y", "z"])
    with pytest.raises(BasisMismatchError):
        apply(UnitaryMap.identity(basis3), AmplitudeVector(other, np.zeros(6)))


def test_apply_preserves_norm_for_random_states(basis3):
    rng = np.random.default_rng(4)
    u = UnitaryMap(basis3, random_unitary(6, rng))
    for _ in range(1000):
        v = AmplitudeVector(basis3, rng.standard_normal(6) + 1j * rng.standard_normal(6))
        assert abs(apply(u, v).norm() - v.norm()) <= TOL * max(1.0, v.norm())


@pytest.mark.parametrize("lam", [0, 1, 2 + 3j])
def test_apply_is_linear(basis3, lam):
    rng = np.random.default_rng(5)
    u = UnitaryMap(basis3, random_unitary(6, rng))
    v = AmplitudeVector(basis3, rng.standard_normal(6) + 1j * rng.standard_normal(6))
    lhs = apply(u, v.scale(lam)).amplitudes
    rhs = lam * apply(u, v).amplitudes
    np.testing.assert_allclose(lhs, rhs, atol=TOL)


def test_compose_associative_on_random_triples(basis3):
    rng = np.random.default_rng(6)
    for _ in range(50):
        a, b, c = (UnitaryMap(basis3, random_unitary(6, rng)) for _ in range(3))
        left = compose(compose(a, b), c)
        right = compose(a, compose(b, c))
        assert np.max(np.abs(left.matrix - right.matrix)) <= TOL


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
def test_random_unitaries_pass_construction(n, seed):
    m = random_unitary(n, np.random.default_rng(seed))
    assert unitarity_defect(m) <= TOL
    labels = tuple(ModeLabel(f"p{i // 2}", "HV"[i % 2]) for i in range(n))
    UnitaryMap(ModeBasis(labels), m)


def test_permutation_identity(basis3):
    assert permutation_map(basis3, {}) == UnitaryMap.identity(basis3)
    assert permutation_map(basis3, {lab: lab for lab in basis3}) == UnitaryMap.identity(basis3)


def test_permutation_sends_mode_to_image(basis3):
    p = permutation_map(basis3, {"a.H": "c.V", "c.V": "a.H"})
    assert p.entry("c.V", "a.H") == 1
    assert p.entry("a.H", "c.V") == 1
    assert set(np.unique(p.matrix.real)) <= {0.0, 1.0}
    assert np.all(p.matrix.imag == 0)


def test_swap_is_involution_and_matches_definition(basis_q):
    swap = {"n.H": "m.H", "m.H": "n.H"}  # logical modes 2 <-> 0
    p = permutation_map(basis_q, swap)
    assert compose(p, p) == UnitaryMap.identity(basis_q)
    expected = np.eye(3)[[2, 1, 0]]
    np.testing.assert_array_equal(p.matrix.real, expected)


def test_permutation_errors(basis3):
    with pytest.raises(ValueError, match="bijection"):
        permutation_map(basis3, {"a.H": "b.H"})
    with pytest.raises(KeyError, match="z.H"):
        permutation_map(basis3, {"a.H": "z.H", "z.H": "a.H"})
