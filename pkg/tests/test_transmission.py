"""Node system assembly, M-matrix certification, transmission weights."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import cross_ones_coupling, random_coupling, random_network, simple_star
from starflux import (
    AssumptionViolated,
    CouplingMatrix,
    SingularMatrix,
    alpha_from_k,
    assemble_q,
    certify_m_matrix,
    check_irreducible,
    compute_gamma,
    connected_components,
    hyperbolic_node_traces,
)


def two_arc_system(k: float, lam_out: float):
    net = simple_star([1.0], [lam_out])
    K = CouplingMatrix.from_array([[0.0, k], [k, 0.0]], net)
    return net, K


def test_assemble_q_frozen_two_arcs():
    """Single coupled pair: Q = [[k, -k], [-k, k + speed]], det = k*speed."""
    net, K = two_arc_system(2.0, 3.0)
    qm = assemble_q(net, alpha_from_k(K))
    np.testing.assert_array_equal(qm.q, [[2.0, -2.0], [-2.0, 5.0]])
    assert qm.ordering == (0, 1)
    assert qm.incoming_count == 1
    cert = certify_m_matrix(qm)
    assert cert.det == pytest.approx(6.0, abs=1e-14)


def test_assemble_q_orders_incoming_before_outgoing():
    # arcs interleaved: out, in, out, in
    net_specs = [(1.0, 1.0, "out"), (1.0, 2.0, "in"), (1.0, 3.0, "out"), (1.0, 4.0, "in")]
    from starflux import build_network

    net = build_network(net_specs)
    K = cross_ones_coupling(net)
    qm = assemble_q(net, alpha_from_k(K))
    assert qm.ordering == (1, 3, 0, 2)
    assert qm.incoming_count == 2
    # outgoing rows get their speed added on the diagonal
    np.testing.assert_allclose(np.diag(qm.q), [2.0, 2.0, 2.0 + 1.0, 2.0 + 3.0])
    np.testing.assert_allclose(qm.q, qm.q.T)


def test_q_gershgorin_margins():
    """Incoming rows are dominant with equality, outgoing rows by the speed."""
    rng = np.random.default_rng(3)
    for _ in range(20):
        net = random_network(rng)
        K = random_coupling(rng, net)
        qm = assemble_q(net, alpha_from_k(K))
        off = np.sum(np.abs(qm.q - np.diag(np.diag(qm.q))), axis=1)
        margins = np.diag(qm.q) - off
        n_inc = qm.incoming_count
        np.testing.assert_allclose(margins[:n_inc], 0.0, atol=1e-12)
        out_speeds = [net.arc(a).speed for a in qm.ordering[n_inc:]]
        np.testing.assert_allclose(margins[n_inc:], out_speeds, rtol=1e-12)


def test_certify_m_matrix_flags_and_inverse():
    rng = np.random.default_rng(5)
    for _ in range(20):
        net = random_network(rng)
        K = random_coupling(rng, net)
        qm = assemble_q(net, alpha_from_k(K))
        cert = certify_m_matrix(qm)
        assert cert.sign_pattern_ok
        assert cert.gershgorin_ok
        assert cert.every_block_strict
        assert cert.det > 0.0
        assert cert.inverse_nonneg
        assert cert.m_matrix_ok
        resid = cert.inverse @ qm.q - np.eye(net.m)
        scale = max(1.0, np.max(np.abs(qm.q)) * np.max(np.abs(cert.inverse)))
        assert np.max(np.abs(resid)) <= 1e-10 * scale


def test_certify_m_matrix_rejects_singular_block():
    # uncoupled incoming arc produces a zero pivot
    net = simple_star([1.0, 1.0], [1.0])
    K = CouplingMatrix.from_array(
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]], net
    )
    qm = assemble_q(net, alpha_from_k(K))
    with pytest.raises(SingularMatrix):
        certify_m_matrix(qm)


def test_compute_gamma_frozen_two_in_two_out():
    """Symmetric 2+2 star with unit cross couplings splits flux evenly."""
    net = simple_star([1.0, 1.0], [1.0, 1.0])
    ts = compute_gamma(net, cross_ones_coupling(net))
    np.testing.assert_allclose(ts.gamma, 0.5 * np.ones((2, 2)), atol=1e-14)
    assert ts.certificates.irreducible
    assert ts.certificates.gershgorin_ok
    assert ts.certificates.m_matrix_ok
    assert ts.det_q > 0.0
    # node response to unit flux on the first incoming arc (hand-solved)
    out_vals, weights = hyperbolic_node_traces(ts, np.array([1.0, 0.0]))
    np.testing.assert_allclose(out_vals, [0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(weights, [1.0, 0.5], atol=1e-14)


def test_compute_gamma_single_pair_is_exactly_one():
    for k, lam in [(2.0, 3.0), (0.3, 7.7), (5.0, 0.1)]:
        net, K = two_arc_system(k, lam)
        ts = compute_gamma(net, K)
        assert abs(ts.gamma[0, 0] - 1.0) <= 1e-14


def test_gamma_invariants_random():
    rng = np.random.default_rng(17)
    for _ in range(50):
        net = random_network(rng)
        K = random_coupling(rng, net)
        ts = compute_gamma(net, K)
        assert np.all(ts.gamma >= 0.0)
        np.testing.assert_allclose(ts.gamma.sum(axis=0), 1.0, atol=1e-10)
        np.testing.assert_allclose(ts.z, ts.z.T, atol=1e-10 * np.max(np.abs(ts.z)))
        assert ts.condition_indicator > 0.0


def test_gamma_invariant_under_joint_scaling():
    """Doubling K and all speeds leaves the weights unchanged."""
    rng = np.random.default_rng(23)
    net = random_network(rng)
    K = random_coupling(rng, net)
    ts = compute_gamma(net, K)

    from starflux import build_network

    scaled_specs = [
        (a.length, 2.0 * a.speed, a.orientation.value) for a in net.arcs
    ]
    net2 = build_network(scaled_specs)
    K2 = CouplingMatrix.from_array(2.0 * K.k, net2)
    ts2 = compute_gamma(net2, K2)
    np.testing.assert_array_equal(ts.gamma, ts2.gamma)


def test_reducible_coupling_splits_into_blocks():
    """Two disjoint in/out pairs: block-diagonal weights, identity gamma."""
    net = simple_star([1.0, 2.0], [3.0, 4.0])
    K = CouplingMatrix.from_array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 2.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 0.0],
        ],
        net,
    )
    qm = assemble_q(net, alpha_from_k(K))
    assert not check_irreducible(qm)
    assert len(connected_components(qm.q)) == 2
    ts = compute_gamma(net, K)
    np.testing.assert_allclose(ts.gamma, np.eye(2), atol=1e-14)
    assert not ts.certificates.irreducible
    assert ts.certificates.m_matrix_ok


def test_isolated_outgoing_arc_is_tolerated():
    """An outgoing arc with no couplings gets zero weight, sums still one."""
    net = simple_star([1.0], [1.0, 2.0])
    K = CouplingMatrix.from_array(
        [[0.0, 1.5, 0.0], [1.5, 0.0, 0.0], [0.0, 0.0, 0.0]], net
    )
    ts = compute_gamma(net, K)
    np.testing.assert_allclose(ts.gamma[:, 0], [1.0, 0.0], atol=1e-14)


def test_compute_gamma_requires_incoming_links():
    net = simple_star([1.0, 1.0], [1.0])
    K = CouplingMatrix.from_array(
        [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]], net
    )
    with pytest.raises(AssumptionViolated):
        compute_gamma(net, K)


def test_sign_lemma_positive_coupling_gives_positive_weight():
    rng = np.random.default_rng(29)
    for _ in range(30):
        net = random_network(rng)
        K = random_coupling(rng, net)
        ts = compute_gamma(net, K)
        for lp, l in enumerate(net.outgoing_ids):
            for jp, j in enumerate(net.incoming_ids):
                if K.k[l, j] > 0.0:
                    assert ts.gamma[lp, jp] > 1e-14
