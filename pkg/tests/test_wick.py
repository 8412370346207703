from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qftverify.errors import InvalidPermutation, OffShell, OutsideForwardCone, TooLarge
from qftverify.fields import TwoPointModel
from qftverify.kinematics import on_shell
from qftverify.wick import (
    DiscreteMeasure,
    IndexedLeg,
    beta,
    check_hankel,
    enumerate_pairings,
    free_npoint,
    hankel_matrix,
    is_fermion,
    laplace_B,
    moments,
    pairing_count,
    permutation_sign,
    upsilon,
)


def inversion_parity(kappas, perm):
    """Reference sign: parity of inversions among fermion entries; 0 on a repeat."""
    ferm = [k for k in kappas if k >= 4]
    if len(set(ferm)) < len(ferm):
        return 0
    f = [i for i in perm if kappas[i] >= 4]
    inv = sum(1 for a in range(len(f)) for b in range(a + 1, len(f)) if f[a] > f[b])
    return (-1) ** inv


def test_fermion_index_rule():
    assert [is_fermion(k) for k in range(12)] == [False] * 4 + [True] * 8


@pytest.mark.parametrize("n,count", [(0, 1), (2, 1), (4, 3), (6, 15), (8, 105), (12, 10395), (3, 0)])
def test_pairing_counts(n, count):
    assert pairing_count(n) == count
    if n <= 12:
        assert len(enumerate_pairings(n)) == count


def test_pairings_are_perfect_matchings():
    for pl in enumerate_pairings(6):
        assert sorted(pl.order) == list(range(6))
        assert all(a < b for a, b in pl.pairs)


def test_too_many_legs():
    with pytest.raises(TooLarge):
        enumerate_pairings(14)


def test_invalid_permutation():
    with pytest.raises(InvalidPermutation):
        permutation_sign([0, 4], [0, 0])


def test_identity_has_positive_sign():
    assert permutation_sign([4, 5, 0, 9], [0, 1, 2, 3]) == 1


def test_adjacent_swap_rules():
    assert permutation_sign([4, 5], [1, 0]) == -1
    assert permutation_sign([0, 5], [1, 0]) == 1
    assert permutation_sign([0, 1], [1, 0]) == 1
    assert permutation_sign([4, 4], [1, 0]) == 0


def test_repeated_fermion_gives_zero_everywhere():
    for perm in permutations(range(3)):
        assert permutation_sign([4, 0, 4], list(perm)) == 0
    # repeated bosons are harmless
    assert permutation_sign([0, 0, 5], [2, 1, 0]) == 1


@given(st.lists(st.sampled_from([0, 1, 4, 5, 9, 11]), min_size=1, max_size=6), st.randoms())
def test_sign_matches_inversion_parity(kappas, rnd):
    perm = list(range(len(kappas)))
    rnd.shuffle(perm)
    assert permutation_sign(kappas, perm) == inversion_parity(kappas, perm)


@given(st.permutations(list(range(5))), st.permutations(list(range(5))))
def test_sign_is_multiplicative(p, q):
    kappas = [4, 0, 5, 6, 1]
    composed = [p[i] for i in q]
    permuted = [kappas[i] for i in p]
    assert permutation_sign(kappas, composed) == permutation_sign(kappas, p) * permutation_sign(permuted, q)


def test_four_leg_signs():
    # lexicographic pairings (01)(23), (02)(13), (03)(12)
    assert [pl.sign for pl in enumerate_pairings(4, [4, 5, 6, 7])] == [1, -1, 1]
    assert [pl.sign for pl in enumerate_pairings(4, [0, 1, 2, 3])] == [1, 1, 1]
    assert [pl.sign for pl in enumerate_pairings(4, [0, 1, 4, 5])] == [1, 1, -1]
    assert [pl.sign for pl in enumerate_pairings(4, [4, 0, 1, 5])] == [1, 1, 1]


def test_two_leg_function_is_M_entry():
    model = TwoPointModel()
    p = on_shell(1.0, [0.2, 0.1, -0.3])
    legs = [IndexedLeg(-p, 4), IndexedLeg(p, 9)]
    res = free_npoint(legs, model)
    assert len(res.terms) == 1 and res.terms[0].supported
    assert res.value == model.M(p)[4, 9]


def test_odd_leg_count_vanishes():
    k = np.array([1.0, 0, 0, 1.0])
    assert free_npoint([IndexedLeg(k, 0)] * 3).value == 0


def test_four_photon_function():
    model = TwoPointModel()
    k = np.array([1.0, 0, 0, 1.0])
    legs = [IndexedLeg(k, 1), IndexedLeg(-k, 1), IndexedLeg(k, 2), IndexedLeg(-k, 2)]
    res = free_npoint(legs, model)
    assert len(res.terms) == 3
    assert [t.supported for t in res.terms] == [True, False, True]
    # (01)(23) -> g11 g22 and (03)(12) -> g12 g21 = 0
    assert np.isclose(res.value, (2 * np.pi) ** 2)
    assert all(t.kinds == ("B", "B") for t in res.terms)


def test_four_fermion_function_sign():
    model = TwoPointModel()
    p = on_shell(1.0, [0.3, 0.0, 0.4])
    q = on_shell(1.0, [-0.1, 0.5, 0.2])
    legs = [IndexedLeg(-p, 4), IndexedLeg(-q, 5), IndexedLeg(p, 8), IndexedLeg(q, 9)]
    res = free_npoint(legs, model)
    supported = [t for t in res.terms if t.supported]
    assert len(supported) == 1
    expected = -model.M(p)[4, 8] * model.M(q)[5, 9]
    assert np.isclose(res.value, expected)
    assert supported[0].kinds == ("F", "F")


def test_fermion_exchange_antisymmetry():
    model = TwoPointModel()
    p = on_shell(1.0, [0.3, 0.0, 0.4])
    q = on_shell(1.0, [-0.1, 0.5, 0.2])
    legs = [IndexedLeg(-p, 4), IndexedLeg(-q, 5), IndexedLeg(p, 8), IndexedLeg(q, 9)]
    swapped = [legs[1], legs[0], legs[2], legs[3]]
    a, b = free_npoint(legs, model).value, free_npoint(swapped, model).value
    assert abs(a) > 0 and np.isclose(a, -b)


def test_off_shell_leg_rejected():
    with pytest.raises(OffShell):
        free_npoint([IndexedLeg(np.array([1.0, 0, 0, 0.5]), 0), IndexedLeg(np.array([-1.0, 0, 0, -0.5]), 0)])
    with pytest.raises(OffShell):
        free_npoint([IndexedLeg(np.array([1.0, 0, 0, 1.0]), 4), IndexedLeg(np.array([-1.0, 0, 0, -1.0]), 8)])


def test_outgoing_legs_enter_negated():
    p = on_shell(1.0, [0, 0, 0.2])
    assert np.array_equal(IndexedLeg(p, 4, "out").argument, -p)


def test_point_mass_moments():
    mu = DiscreteMeasure.from_atoms([(2.0, 1.0)])
    assert np.array_equal(moments(mu, 4), [1, 2, 4, 8, 16])
    assert check_hankel(moments(mu, 4))


def test_hankel_matrix_layout():
    assert np.array_equal(hankel_matrix([1, 2, 3, 4, 5]), [[1, 2, 3], [2, 3, 4], [3, 4, 5]])


def test_hankel_negative_control():
    assert not check_hankel([1, 0, 1, 0, -1])


@given(
    st.lists(st.tuples(st.floats(-3, 3), st.floats(0.01, 5)), min_size=1, max_size=6),
    st.integers(0, 4),
)
def test_measure_moments_are_hankel_psd(atoms, k):
    mu = DiscreteMeasure.from_atoms(atoms)
    assert check_hankel(moments(mu, 2 * k), tol=1e-9)


def test_empty_measure():
    mu = DiscreteMeasure.from_atoms([])
    p = np.array([1.0, 0, 0, 0.5])
    assert upsilon(mu, p) == 0
    assert np.array_equal(laplace_B(mu, p), np.zeros((12, 12)))
    assert beta(mu, 3) == 0


def test_single_atom_transform():
    s = np.array([1.0, 0.0, 0.0, 0.0])
    mu = DiscreteMeasure.from_atoms([(s, 0.5)])
    p = np.array([2.0, 0.5, 0.0, 0.0])
    assert np.isclose(upsilon(mu, p), 0.5 * np.exp(-2.0))
    B = laplace_B(mu, p)
    assert np.allclose(B, 0.5 * np.exp(-2.0) * TwoPointModel().M(s))


def test_beta_monotone():
    mu = DiscreteMeasure.from_atoms([(0.5, 1.0), (2.0, 0.3)])
    b = [beta(mu, j) for j in range(6)]
    assert b[0] == pytest.approx(1.3)
    assert all(x > y for x, y in zip(b, b[1:]))


def test_outside_forward_cone():
    mu = DiscreteMeasure.from_atoms([(np.array([1.0, 0, 0, 0]), 1.0)])
    with pytest.raises(OutsideForwardCone):
        upsilon(mu, [0.5, 1.0, 0, 0])
    # the boundary of the cone is allowed
    assert upsilon(mu, [1.0, 1.0, 0, 0]) > 0


def test_measure_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        DiscreteMeasure.from_atoms([(1.0, 0.0)])
