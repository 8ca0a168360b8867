import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harmchain.chain import ChainSpec, Topology, build_potential, covariance, ground_covariance
from harmchain.errors import DomainError, NumericalError, ValidationError
from harmchain.negativity import (
    Definiteness,
    GroupSelection,
    bisection,
    bisection_bound,
    chain_negativity,
    classify_vpp_f,
    coupling_closed_form,
    even_odd,
    even_odd_negativity,
    even_odd_rate,
    flip_log_trace,
    log_negativity,
    log_negativity_oracle,
    nn_closed_form,
    q_spectrum,
    reduce,
    separated_blocks,
    vpp_f,
)


def ring(n, *alphas, beta=math.inf):
    return ChainSpec(n, tuple(alphas), Topology.RING, beta)


# -- group selections ---------------------------------------------------------

def test_selection_canonical_order():
    sel = GroupSelection((3, 1), (0,))
    assert sel.group_a == (1, 3)
    assert sel.indices == (0, 1, 3)
    np.testing.assert_array_equal(sel.signs, [-1, 1, 1])


@pytest.mark.parametrize("a,b", [((), (1,)), ((0, 1), (1, 2)), ((0, 0), (1,)), ((-1,), (2,))])
def test_selection_rejects(a, b):
    with pytest.raises(ValidationError):
        GroupSelection(a, b)


def test_selection_out_of_range():
    with pytest.raises(ValidationError, match="outside"):
        chain_negativity(ring(4, 1.0), GroupSelection((0,), (4,)))


def test_builders():
    assert bisection(2, 3) == GroupSelection((0, 1), (2, 3, 4))
    assert even_odd(6) == GroupSelection((0, 2, 4), (1, 3, 5))
    assert separated_blocks(2, 1) == GroupSelection((0, 1), (3, 4))
    assert GroupSelection.from_one_based([1, 2], [4, 5]) == GroupSelection((0, 1), (3, 4))
    with pytest.raises(ValidationError):
        GroupSelection.from_one_based([0], [1])


# -- core computation ---------------------------------------------------------

def test_uncoupled_chain_has_no_entanglement():
    r = chain_negativity(ring(6), bisection(3, 3))
    assert r.log_negativity == 0.0
    np.testing.assert_allclose(r.symplectic_spectrum, 1.0, atol=1e-14)


def test_known_spectrum_adjacent_pairs():
    r = chain_negativity(ring(40, 20.0), GroupSelection.from_one_based([1, 2], [4, 5]))
    np.testing.assert_allclose(
        r.symplectic_spectrum, [0.8836095, 1.09383735, 1.13389248, 2.06296905], atol=1e-7
    )
    assert r.log_negativity == pytest.approx(-math.log2(0.8836095), abs=1e-6)
    assert r.negativity == pytest.approx(2 ** r.log_negativity)


def test_known_spectrum_separated_pair():
    r = chain_negativity(ring(40, 20.0), GroupSelection.from_one_based([1], [4]))
    np.testing.assert_allclose(r.symplectic_spectrum, [1.17244553, 1.8065137], atol=1e-7)
    assert r.log_negativity == 0.0


def test_shape_and_sign_validation():
    with pytest.raises(ValidationError):
        log_negativity(np.eye(2), np.eye(3), [1, -1])
    with pytest.raises(ValidationError):
        log_negativity(np.eye(2), np.eye(2), [1, 0.5])
    with pytest.raises(NumericalError):
        log_negativity(-np.eye(2), np.eye(2), [1, -1])
    with pytest.raises(NumericalError):
        log_negativity_oracle(np.eye(2), -np.eye(2), [1, -1])


def test_oracle_spectrum_matches():
    cov = covariance(ring(16, 3.0, 0.5))
    sel = GroupSelection((0, 2, 5), (1, 7, 9, 10))
    a, b = log_negativity(*reduce(cov, sel)), log_negativity_oracle(*reduce(cov, sel))
    np.testing.assert_allclose(np.sort(b.symplectic_spectrum), a.symplectic_spectrum, rtol=1e-9)


@st.composite
def chains_and_selections(draw):
    n = draw(st.integers(5, 24))
    m_max = (n - 1) // 2
    alphas = draw(st.lists(st.floats(0.0, 25.0), min_size=1, max_size=min(3, m_max)))
    beta = draw(st.one_of(st.just(math.inf), st.floats(0.1, 20.0)))
    perm = draw(st.permutations(range(n)))
    na = draw(st.integers(1, min(8, n - 1)))
    nb = draw(st.integers(1, min(8, n - na)))
    sel = GroupSelection(tuple(perm[:na]), tuple(perm[na : na + nb]))
    return ChainSpec(n, tuple(alphas), Topology.RING, beta), sel


@settings(deadline=None, max_examples=60)
@given(chains_and_selections())
def test_oracle_equivalence(case):
    spec, sel = case
    cov = covariance(spec)
    a = log_negativity(*reduce(cov, sel)).log_negativity
    b = log_negativity_oracle(*reduce(cov, sel)).log_negativity
    assert abs(a - b) <= 1e-9
    assert a >= 0.0


@settings(deadline=None, max_examples=40)
@given(chains_and_selections(), st.integers(0, 30))
def test_swap_and_rotation_invariance(case, offset):
    spec, sel = case
    cov = covariance(spec)
    base = chain_negativity(spec, sel, cov).log_negativity
    assert chain_negativity(spec, sel.swapped(), cov).log_negativity == pytest.approx(base, abs=1e-9)
    moved = sel.shifted(offset, spec.n)
    assert chain_negativity(spec, moved, cov).log_negativity == pytest.approx(base, abs=1e-9)


def test_mirror_invariance():
    spec = ring(12, 4.0, 1.0)
    sel = GroupSelection((0, 1, 5), (2, 8))
    mirrored = GroupSelection(tuple(11 - i for i in sel.group_a), tuple(11 - i for i in sel.group_b))
    assert chain_negativity(spec, mirrored).log_negativity == pytest.approx(
        chain_negativity(spec, sel).log_negativity, abs=1e-10
    )


# -- symmetric bisection --------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.1, 1.0, 5.0, 20.0])
@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_nearest_neighbour_closed_form(alpha, n):
    got = chain_negativity(ring(n, alpha), bisection(n // 2, n // 2)).log_negativity
    assert got == pytest.approx(nn_closed_form(alpha), abs=1e-8)


def test_nn_closed_form_values():
    assert nn_closed_form(0.0) == 0.0
    assert nn_closed_form(20.0) == pytest.approx(0.5 * math.log2(81))
    with pytest.raises(DomainError):
        nn_closed_form(-1.0)


def test_coupling_closed_form():
    assert coupling_closed_form([0.0, 5.0]) == 0.0
    assert coupling_closed_form([1.0, 7.0, 2.0]) == pytest.approx(math.log2(13))
    with pytest.raises(DomainError):
        coupling_closed_form([-1.0])


@pytest.mark.parametrize("n", [8, 12, 16])
def test_even_couplings_drop_out(n):
    v = build_potential(ring(n, 1.0, 7.0, 2.0))
    assert abs(flip_log_trace(v)) == pytest.approx(math.log2(13), abs=1e-10)
    assert flip_log_trace(build_potential(ring(n, 0.0, 5.0))) == pytest.approx(0.0, abs=1e-12)


def test_second_neighbour_only_bound_is_loose():
    # two interleaved decoupled rings, each cut twice by the bisection
    spec = ring(12, 0.0, 5.0)
    v = build_potential(spec)
    assert bisection_bound(v) == pytest.approx(0.0, abs=1e-12)
    assert chain_negativity(spec, bisection(6, 6)).log_negativity > 1.0


def test_bound_requires_even_ring():
    with pytest.raises(ValidationError):
        bisection_bound(build_potential(ring(7, 1.0)))
    with pytest.raises(ValidationError):
        flip_log_trace(build_potential(ChainSpec(8, (1.0,), Topology.TERMINATED)))


@st.composite
def even_rings(draw):
    n = 2 * draw(st.integers(4, 12))
    alphas = draw(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=3))
    return ring(n, *alphas)


@settings(deadline=None, max_examples=40)
@given(even_rings())
def test_bound_and_equality_condition(spec):
    v = build_potential(spec)
    n_sym = chain_negativity(spec, bisection(spec.n // 2, spec.n // 2)).log_negativity
    bound = bisection_bound(v)
    assert n_sym >= bound - 1e-9
    assert abs(flip_log_trace(v)) == pytest.approx(coupling_closed_form(spec.couplings), abs=1e-10)
    if classify_vpp_f(v).semidefinite:
        assert n_sym == pytest.approx(bound, abs=1e-9)


def test_equality_can_hold_with_indefinite_vpp_f():
    # semidefiniteness is sufficient, not necessary; confirmed to 50 digits with mpmath
    spec = ring(8, 9.24556, 2.506102, 2.55993)
    v = build_potential(spec)
    assert classify_vpp_f(v) is Definiteness.INDEFINITE
    n_sym = chain_negativity(spec, bisection(4, 4)).log_negativity
    assert n_sym == pytest.approx(bisection_bound(v), abs=1e-12)


def test_bound_is_strict_when_indefinite():
    spec = ring(16, 1.0, 1.0)
    v = build_potential(spec)
    assert classify_vpp_f(v) is Definiteness.INDEFINITE
    n_sym = chain_negativity(spec, bisection(8, 8)).log_negativity
    assert n_sym > bisection_bound(v) + 1e-6


# -- V''F classification --------------------------------------------------------

def test_vpp_f_nearest_neighbour_is_negative_semidefinite():
    v = build_potential(ring(10, 3.0))
    w = vpp_f(v)
    assert w.shape == (5, 5)
    assert classify_vpp_f(v) is Definiteness.NEG_SEMIDEF


def test_vpp_f_zero_counts_as_negative():
    assert classify_vpp_f(np.eye(8)) is Definiteness.NEG_SEMIDEF


def test_vpp_f_positive_case():
    assert classify_vpp_f(build_potential(ring(8, -0.1))) is Definiteness.POS_SEMIDEF


@pytest.mark.parametrize("n", [8, 10, 16])
def test_two_equal_couplings_indefinite(n):
    assert classify_vpp_f(build_potential(ring(n, 1.0, 1.0))) is Definiteness.INDEFINITE


def test_classification_rejects_odd_and_open():
    with pytest.raises(ValidationError):
        classify_vpp_f(build_potential(ring(9, 1.0)))
    with pytest.raises(ValidationError):
        classify_vpp_f(build_potential(ChainSpec(8, (1.0,), Topology.TERMINATED)))


# -- Q spectrum -----------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.5, 5.0, 20.0])
@pytest.mark.parametrize("half_split", [True, False])
def test_q_spectrum_reciprocal_and_balanced(alpha, half_split):
    n = 20
    v = build_potential(ring(n, alpha))
    q = q_spectrum(v, half_split)
    np.testing.assert_allclose(q * q[::-1], 1.0, atol=1e-8)
    if half_split:
        assert np.sum(q > 1) == n // 2
    else:
        # k = n/4 modes are unmoved by the odd/even flip and sit at q = 1
        assert np.sum(q > 1 + 1e-9) == np.sum(q < 1 - 1e-9)
    # det Q = 1 in log form
    assert abs(np.sum(np.log(q))) < 1e-9


# min |q - 1| for n = 20 computed in 60-digit arithmetic (mpmath)
TRUE_GAPS = {0.5: 1.7987e-11, 5.0: 2.2493e-9, 20.0: 4.245e-9}


@pytest.mark.parametrize("alpha", sorted(TRUE_GAPS))
def test_q_spectrum_smallest_gap_matches_high_precision(alpha):
    q = q_spectrum(build_potential(ring(20, alpha)))
    gap = np.min(np.abs(q - 1))
    assert gap == pytest.approx(TRUE_GAPS[alpha], rel=0.05)
    # the double-precision result keeps the two near-1 eigenvalues on opposite sides
    near = q[np.argsort(np.abs(q - 1))[:2]]
    assert (near[0] - 1) * (near[1] - 1) < 0


def test_q_spectrum_high_precision_oracle():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    n, alpha = 12, 5.0
    row = ring(n, alpha).first_row
    v = mpmath.matrix([[row[(j - i) % n] for j in range(n)] for i in range(n)])
    w, u = mpmath.eigsy(v)
    d_half = mpmath.diag([mpmath.sqrt(x) for x in w])
    d_inv = mpmath.diag([1 / mpmath.sqrt(x) for x in w])
    root = u * d_half * u.T
    inv_root = u * d_inv * u.T
    p = mpmath.diag([1 if i < n // 2 else -1 for i in range(n)])
    q = inv_root * p * root * p
    ref = sorted(float(mpmath.re(x)) for x in mpmath.eig(q)[0])
    got = q_spectrum(build_potential(ring(n, alpha)))
    np.testing.assert_allclose(got, ref, rtol=1e-10)


def test_q_spectrum_odd_length_rejected():
    with pytest.raises(ValidationError):
        q_spectrum(build_potential(ring(9, 1.0)))


# -- odd/even split ---------------------------------------------------------------

@pytest.mark.parametrize("n", [8, 16, 32, 48])
@pytest.mark.parametrize("couplings", [(20.0,), (3.0, 1.0), (0.5, 0.0, 2.0)])
def test_even_odd_closed_form_matches_general(n, couplings):
    if len(couplings) > (n - 1) // 2:
        pytest.skip("too many couplings for this ring")
    general = chain_negativity(ring(n, *couplings), even_odd(n)).log_negativity
    assert even_odd_negativity(n, couplings) == pytest.approx(general, abs=1e-9)


def test_even_odd_rate_reference_values():
    assert even_odd_rate(20.0) == pytest.approx(0.69168892, abs=1e-7)
    rates = [even_odd_rate(a) for a in (0.1, 1.0, 10.0, 100.0)]
    assert np.all(np.diff(rates) > 0)
    with pytest.raises(DomainError):
        even_odd_rate(0.0)


def test_even_odd_rate_against_scipy():
    integrate = pytest.importorskip("scipy.integrate")
    alpha = 3.0
    f = lambda x: math.log2((1 + 2 * alpha * (1 + math.cos(x))) / (1 + 2 * alpha * (1 - math.cos(x))))
    ref = integrate.quad(f, 0, math.pi / 2, epsabs=1e-13)[0] / (2 * math.pi)
    assert even_odd_rate(alpha) == pytest.approx(ref, abs=1e-10)


def test_even_odd_slope_converges_to_rate():
    a, b = even_odd_negativity(380, (20.0,)), even_odd_negativity(400, (20.0,))
    assert (b - a) / 20 == pytest.approx(even_odd_rate(20.0), abs=1e-4)


def test_even_odd_requires_even_n():
    with pytest.raises(ValidationError):
        even_odd_negativity(9, (1.0,))


# -- thermal ------------------------------------------------------------------------

def test_thermal_negativity_nonincreasing():
    spec0 = ring(16, 20.0)
    v = build_potential(spec0)
    sel = bisection(8, 8)
    values = []
    for t in np.linspace(0.0, 4.0, 17):
        spec = ChainSpec.from_temperature(16, (20.0,), temperature=float(t))
        values.append(chain_negativity(spec, sel).log_negativity)
    assert values[0] == pytest.approx(nn_closed_form(20.0), abs=1e-9)
    assert np.all(np.diff(values) <= 1e-9)
    assert values[-1] == 0.0
    assert v.shape == (16, 16)


def test_terminated_smaller_than_ring():
    n = 20
    sel = bisection(10, 10)
    n_ring = chain_negativity(ring(n, 20.0), sel).log_negativity
    n_open = chain_negativity(ChainSpec(n, (20.0,), Topology.TERMINATED), sel).log_negativity
    assert 0 < n_open < n_ring


# -- further contract examples ---------------------------------------------------

def test_no_transpose_means_no_negativity():
    spec = ring(10, 5.0)
    cov = ground_covariance(build_potential(spec))
    full = tuple(range(10))
    mu_x, mu_p, _ = reduce(cov, GroupSelection(full[:5], full[5:]))
    plus = np.ones(10)
    r = log_negativity(mu_x, mu_p, plus)
    assert r.log_negativity == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(r.symplectic_spectrum, 1.0, atol=1e-8)
    assert log_negativity_oracle(mu_x, mu_p, plus).log_negativity == pytest.approx(0.0, abs=1e-9)
    # a mixed reduced state without transpose still has all lambda >= 1
    mu_x, mu_p, _ = reduce(cov, GroupSelection((0,), (3,)))
    assert log_negativity(mu_x, mu_p, [1.0, 1.0]).log_negativity == 0.0


def test_reduce_full_selection_and_canonical_order():
    cov = covariance(ring(8, 2.0))
    mu_x, mu_p, signs = reduce(cov, bisection(4, 4))
    assert np.array_equal(mu_x, cov.x_block) and np.array_equal(mu_p, cov.p_block)
    np.testing.assert_array_equal(signs, [1, 1, 1, 1, -1, -1, -1, -1])
    a = reduce(cov, GroupSelection((5, 1), (3, 0)))
    b = reduce(cov, GroupSelection((1, 5), (0, 3)))
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_identity_potential_edge_cases():
    np.testing.assert_allclose(q_spectrum(np.eye(6)), 1.0, atol=1e-14)
    assert bisection_bound(np.eye(6)) == pytest.approx(0.0, abs=1e-15)
    assert even_odd_negativity(8, ()) == 0.0


@pytest.mark.parametrize("alpha", [0.3, 2.0, 20.0])
def test_nearest_neighbour_bound_matches_closed_form(alpha):
    v = build_potential(ring(12, alpha))
    assert bisection_bound(v) == pytest.approx(nn_closed_form(alpha), abs=1e-10)
    assert bisection_bound(v) == pytest.approx(coupling_closed_form([alpha]) / 2, abs=1e-10)


def test_small_closed_form_values():
    assert nn_closed_form(2.0) == pytest.approx(math.log2(3.0), abs=1e-15)
    assert coupling_closed_form([20.0]) == pytest.approx(6.33985, abs=1e-5)


@settings(deadline=None, max_examples=25)
@given(even_rings())
def test_determinant_identity_when_semidefinite(spec):
    v = build_potential(spec)
    if not classify_vpp_f(v).semidefinite:
        return
    q = q_spectrum(v)
    lhs = float(np.prod(q[q < 1]))
    rhs = math.exp(-0.5 * abs(flip_log_trace(v)) * math.log(2))
    assert lhs == pytest.approx(rhs, abs=1e-8)


def test_even_odd_forty_matches_general():
    general = chain_negativity(ring(40, 20.0), even_odd(40)).log_negativity
    assert even_odd_negativity(40, (20.0,)) == pytest.approx(general, abs=1e-9)


def test_even_odd_slope_by_two_hundred():
    assert even_odd_negativity(200, (20.0,)) / 200 == pytest.approx(even_odd_rate(20.0), abs=1e-3)


def test_even_odd_rate_small_coupling_limit():
    assert even_odd_rate(1e-8) < 1e-7
