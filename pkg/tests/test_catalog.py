import math

import numpy as np
import pytest

from qnetcert.catalog import (
    RotationParams,
    build,
    coloring_span_pairs,
    make_1_2_cm,
    make_5_0_tc,
    make_complete_cm,
    make_graph_coloring_cm,
    make_ring_tc,
    reflection_block,
    resolve,
    ring_cm_twin,
    ring_twin_label_map,
)
from qnetcert.network import check_ecs, check_ndcs, find_pfis
from qnetcert.outcomes import (
    JointDistribution,
    RevealedTuple,
    TokenCount,
    is_ambiguous_output,
)
from qnetcert.quantum import joint_distribution, validate_strategy

from conftest import random_unitary


class TestRotationParams:
    def test_matrices_are_orthogonal(self):
        p = RotationParams(0.77)
        assert np.allclose(p.r3 @ p.r3.T, np.eye(3), atol=1e-12)
        assert np.allclose(p.r2 @ p.r2.T, np.eye(2), atol=1e-12)

    def test_theta_zero_is_identity(self):
        p = RotationParams(0.0)
        assert np.allclose(p.r3, np.eye(3))
        assert np.allclose(p.r2, np.eye(2))


class TestValidity:
    @pytest.mark.parametrize("theta", [0.0, math.pi / 8, 0.3, 1.2])
    def test_5_0(self, theta):
        net, s = make_5_0_tc(theta)
        assert validate_strategy(net, s.states, s.bases).ok

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
    def test_rings(self, n, rng):
        net, s = make_ring_tc(n, blocks=[random_unitary(rng, 2) for _ in range(n)])
        assert validate_strategy(net, s.states, s.bases).ok

    @pytest.mark.parametrize("theta", [0.0, math.pi / 8, 0.9])
    def test_1_2(self, theta):
        net, s = make_1_2_cm(theta)
        assert validate_strategy(net, s.states, s.bases).ok

    @pytest.mark.parametrize("n", [4, 5])
    def test_complete(self, n):
        net, s = make_complete_cm(n, lam=0.37)
        assert validate_strategy(net, s.states, s.bases).ok

    def test_coloring(self):
        net, s = make_graph_coloring_cm(5, lam=0.21)
        assert validate_strategy(net, s.states, s.bases).ok

    def test_invalid_omegas_rejected(self):
        with pytest.raises(ValueError):
            make_ring_tc(3, blocks=[np.ones((2, 2))] * 3)
        with pytest.raises(ValueError):
            make_5_0_tc(0.0, a3=np.ones((3, 3)))
        with pytest.raises(ValueError):
            make_complete_cm(3)
        with pytest.raises(ValueError):
            make_graph_coloring_cm(4)


class TestStructuralClaims:
    def test_catalog_networks_pass_the_asserted_checks(self):
        for n in (3, 4, 5):
            net, _ = make_ring_tc(n, lam=0.2)
            assert check_ndcs(net) and check_ecs(net) and find_pfis(net) is not None
        net, _ = make_1_2_cm(0.0)
        assert not check_ndcs(net)
        assert check_ecs(net) and find_pfis(net) is not None
        net, _ = make_complete_cm(4, lam=0.1)
        assert check_ecs(net) and find_pfis(net) is not None
        net, _ = make_graph_coloring_cm(5, lam=0.1)
        assert check_ecs(net) and find_pfis(net) is not None


class TestFiveZeroDetails:
    def test_theta_zero_bases_are_computational(self):
        _, s = make_5_0_tc(0.0)
        for basis in s.bases:
            for v in basis.vectors:
                assert len(v.amplitudes) == 1
                assert abs(abs(next(iter(v.amplitudes.values()))) - 1.0) < 1e-12

    def test_token_marginal_is_theta_independent(self):
        from qnetcert.outcomes import token_marginal
        from qnetcert.quantum import coarse_grain

        key = (TokenCount(1), TokenCount(1), TokenCount(2), TokenCount(1))
        for theta in (0.0, math.pi / 8, 0.3):
            net, s = make_5_0_tc(theta)
            tok = coarse_grain(joint_distribution(net, s.states, s.bases), token_marginal)
            assert tok.p(key) == pytest.approx(3 / 32, abs=1e-12)


class TestRingDetails:
    def test_state_dimension(self):
        net, s = make_ring_tc(3, lam=0.1)
        dims = 1
        for st in s.states:
            dims *= 2 * 2
        assert dims == 2 ** 6

    def test_even_ring_equals_cm_twin(self, rng):
        for n in (4, 6):
            blocks = [random_unitary(rng, 2) for _ in range(n)]
            net, s = make_ring_tc(n, blocks=blocks)
            net2, s2 = ring_cm_twin(n, blocks)
            d1 = joint_distribution(net, s.states, s.bases)
            d2 = joint_distribution(net2, s2.states, s2.bases)
            maps = [ring_twin_label_map(j + 1) for j in range(n)]
            mapped = {
                tuple(maps[j](a) for j, a in enumerate(o)): p
                for o, p in d1.atoms.items()
            }
            assert JointDistribution(net.parties, mapped).allclose(d2, 1e-12)

    def test_twin_requires_even_n(self):
        with pytest.raises(ValueError):
            ring_cm_twin(3, [reflection_block(0.3)] * 3)


class TestOneTwoDetails:
    def test_revealed_rows_are_the_anticyclic_colorings(self):
        net, s = make_1_2_cm(0.5)
        # Anti-cyclic colorings (c_S1, c_S2, c_S3), 0-based.
        anticyclic = [(2, 1, 0), (0, 2, 1), (1, 0, 2)]
        for b in s.bases:
            revealed = {v.label.symbols for v in b.vectors if isinstance(v.label, RevealedTuple)}
            assert len(revealed) == 3
            for coloring in anticyclic:
                colors = dict(zip(net.source_ids, coloring))
                got = tuple(colors[sid] for sid in net.party_sources(b.party))
                assert got in revealed

    def test_nine_rows_per_party(self):
        _, s = make_1_2_cm(0.1)
        assert all(len(b.vectors) == 9 for b in s.bases)


class TestCompleteDetails:
    def test_k4_party_basis_has_eight_vectors(self):
        _, s = make_complete_cm(4, lam=0.3)
        assert all(len(b.vectors) == 8 for b in s.bases)

    def test_ambiguous_event_probability(self):
        net, s = make_complete_cm(4, lam=0.45)
        dist = joint_distribution(net, s.states, s.bases)
        assert dist.event_mass(is_ambiguous_output) == pytest.approx(2 ** -5, abs=1e-12)


class TestColoringDetails:
    def test_span_sizes(self):
        # Number of distinct-color pairs on the two allowed sums for n=5.
        sizes = {(i, j): len(coloring_span_pairs(5, i, j))
                 for i in range(1, 6) for j in range(i + 1, 6)}
        assert sizes[(1, 2)] == 4 and sizes[(1, 4)] == 8 and sizes[(1, 5)] == 4
        assert sum(sizes.values()) == 4 * 6 + 8 * 4

    def test_basis_dimensions(self):
        _, s = make_graph_coloring_cm(5, lam=0.2)
        for b in s.bases:
            assert len(b.vectors) == 25

    def test_event_probability(self):
        net, s = make_graph_coloring_cm(5, lam=0.15)
        from qnetcert.quantum import event_distribution

        _, prob = event_distribution(net, s.states, s.bases, is_ambiguous_output)
        assert prob == pytest.approx(2 / 5 ** 5, abs=1e-12)


class TestResolve:
    def test_names(self):
        assert resolve("5-0") == ("5-0", None)
        assert resolve("ring:6") == ("ring", 6)
        assert resolve("kn:4") == ("complete", 4)
        assert resolve("coloring:5") == ("coloring", 5)
        with pytest.raises(ValueError):
            resolve("pentagon")
        with pytest.raises(ValueError):
            resolve("ring:x")

    def test_build_dispatch(self):
        net, s = build("ring:3", lam=0.2)
        assert s.family == "ring" and len(net.parties) == 3
        net, s = build("5-0", theta=0.1)
        assert s.family == "5-0"
