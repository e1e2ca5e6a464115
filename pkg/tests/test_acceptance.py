"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion including the observed margins and scan witnesses.
"""

import itertools
import math

import numpy as np

from qnetcert.catalog import (
    RotationParams,
    make_1_2_cm,
    make_5_0_tc,
    make_complete_cm,
    make_graph_coloring_cm,
    make_ring_tc,
    reflection_block,
)
from qnetcert.classical import (
    ClassicalStrategy,
    ResponseMap,
    SourcePmf,
    classical_joint,
    enumerate_color_patterns,
    enumerate_token_patterns,
)
from qnetcert.lp import (
    FeasibilityProblem,
    IndeterminateError,
    Row,
    solve_feasibility,
    verify_certificate,
)
from qnetcert.network import (
    Network,
    build_complete,
    build_edge_network,
    build_ring,
    check_ecs,
    check_ndcs,
    find_pfis,
)
from qnetcert.outcomes import (
    Ambiguous,
    ColorMatch,
    RevealedTuple,
    TokenCount,
    color_marginal,
    is_ambiguous_output,
    token_marginal,
)
from qnetcert.quantum import coarse_grain, decohere, event_distribution, joint_distribution
from qnetcert.rigidity import (
    VERDICT_INCONCLUSIVE,
    VERDICT_NONLOCAL,
    ambiguous_event,
    build_q_system,
    certify_nonlocality,
    finner_check,
)

from conftest import random_unitary


def ok(num, text):
    print(f"[criterion {num:02d}] PASS: {text}")


def certify_or_verdict(net, strat):
    try:
        report = certify_nonlocality(net, strat)
        return report.verdict, report
    except IndeterminateError:
        return "INDETERMINATE", None


def test_criterion_01_five_zero_token_marginal():
    key = (TokenCount(1), TokenCount(1), TokenCount(2), TokenCount(1))
    for theta in (0.0, math.pi / 8, 0.3):
        net, s = make_5_0_tc(theta)
        tok = coarse_grain(joint_distribution(net, s.states, s.bases), token_marginal)
        assert abs(tok.p(key) - 3 / 2 ** 5) <= 1e-12
    ok(1, "P_token(1,1,2,1) = 3/32 at theta in {0, pi/8, 0.3}")


def test_criterion_02_five_zero_joint_interference_form():
    rng = np.random.default_rng(2)
    checked = 0
    for theta in rng.uniform(0.05, 1.5, size=5):
        net, s = make_5_0_tc(theta)
        dist = joint_distribution(net, s.states, s.bases)
        a3 = RotationParams(theta).r3
        b2 = RotationParams(theta).r2
        col_b, col_d = (0, 0, 1), (0, 1, 1)  # reused columns for B and D
        for _ in range(10):
            i, k = rng.integers(1, 4, size=2)
            j, l = rng.integers(1, 3, size=2)
            amp = sum(
                a3[i - 1, t] * b2[j - 1, col_b[t]] * a3[k - 1, t] * b2[l - 1, col_d[t]]
                for t in range(3)
            )
            expected = abs(amp) ** 2 / 2 ** 5
            got = dist.p((TokenCount(1, int(i)), TokenCount(1, int(j)),
                          TokenCount(2, int(k)), TokenCount(1, int(l))))
            assert abs(expected - got) <= 1e-12
            checked += 1
    ok(2, f"{checked} ambiguous atoms match (1/32)|sum_t Omega^(t)|^2")


def test_criterion_03_five_zero_certification():
    net, s = make_5_0_tc(math.pi / 8)
    report = certify_nonlocality(net, s)
    assert report.verdict == VERDICT_NONLOCAL
    assert report.margin >= 1e-7
    assert verify_certificate(report.problem, report.result)

    net0, s0 = make_5_0_tc(0.0)
    report0 = certify_nonlocality(net0, s0)
    assert report0.verdict == VERDICT_INCONCLUSIVE
    assert verify_certificate(report0.problem, report0.result)
    ok(3, f"NONLOCAL at pi/8 (margin {report.margin:.3e}), INCONCLUSIVE at 0 with verified witness")


def test_criterion_04_one_two_color_matching():
    net, s = make_1_2_cm(math.pi / 8)
    dist = joint_distribution(net, s.states, s.bases)
    assert abs(dist.event_mass(is_ambiguous_output) - 1 / 9) <= 1e-12

    spec = build_q_system(net, s.states, s.bases, ambiguous_event(), family="1-2")
    r3 = RotationParams(math.pi / 8).r3
    for party in net.parties:
        for i in range(3):
            for t in (1, 2, 3):
                target = spec.marginal_targets[(party, Ambiguous(i + 1), t)]
                assert abs(target - abs(r3[i, t - 1]) ** 2 / 3) <= 1e-10

    report = certify_nonlocality(net, s)
    assert report.verdict == VERDICT_NONLOCAL
    assert verify_certificate(report.problem, report.result)
    ok(4, f"ambiguous mass 1/9, Claim marginals, NONLOCAL (margin {report.margin:.3e})")


def test_criterion_05_ring_family():
    rng = np.random.default_rng(5)
    for n in range(3, 8):
        net, s = make_ring_tc(n, lam=0.3)
        dist = joint_distribution(net, s.states, s.bases)
        assert abs(dist.event_mass(is_ambiguous_output) - 2.0 ** (1 - n)) <= 1e-12

        eta = {sid: 1 for sid in net.source_ids}
        patterns = enumerate_token_patterns(net, eta, {p: 1 for p in net.parties})
        assert len(patterns) == 2

        # Enumerated pattern 1 routes every token to the next party, so a
        # party's marginal reads its |10> component (block column 2).
        col = {1: 1, 2: 0}
        for _ in range(10):
            blocks = [random_unitary(rng, 2) for _ in range(n)]
            netb, sb = make_ring_tc(n, blocks=blocks)
            spec = build_q_system(netb, sb.states, sb.bases, ambiguous_event(), family="ring")
            for j, party in enumerate(netb.parties):
                for r in range(2):
                    for t in (1, 2):
                        target = spec.marginal_targets[(party, TokenCount(1, r + 1), t)]
                        assert abs(target - abs(blocks[j][r, col[t]]) ** 2 / 2) <= 1e-10
    ok(5, "rings n=3..7: event mass 2^(1-n), two routings, Claim marginals at 10 draws each")


def test_criterion_06_ring_infeasibility_scans():
    verdicts3 = {}
    for lam in (0.05, 0.1, 0.2):
        net, s = make_ring_tc(3, lam=lam)
        verdicts3[lam], _ = certify_or_verdict(net, s)
    assert VERDICT_NONLOCAL in verdicts3.values()

    verdicts6 = {}
    for lam in (0.05, 0.1, 0.2):
        net, s = make_ring_tc(6, lam=lam)
        verdict, report = certify_or_verdict(net, s)
        verdicts6[lam] = verdict
        assert verdict == VERDICT_INCONCLUSIVE
        assert verify_certificate(report.problem, report.result)

    witnesses = []
    for eps in np.geomspace(1e-3, 0.2, 10):
        net, s = make_ring_tc(6, lam=float(eps), asym_last=True)
        verdict, report = certify_or_verdict(net, s)
        if verdict == VERDICT_NONLOCAL:
            witnesses.append((float(eps), report.margin))
    assert witnesses, "no epsilon in the scan certified infeasibility"
    ok(6, f"ring3 NONLOCAL at {sorted(k for k, v in verdicts3.items() if v == 'NONLOCAL')}; "
          f"ring6 symmetric feasible; ring6 asymmetric NONLOCAL at eps="
          f"{[f'{e:.4g}(margin {m:.2e})' for e, m in witnesses]}")


def test_criterion_07_complete_network_k4():
    net, s = make_complete_cm(4, lam=0.2)
    _, prob = event_distribution(net, s.states, s.bases, is_ambiguous_output)
    assert abs(prob - 2 ** -5) <= 1e-12

    observed = {p: Ambiguous(0) for p in net.parties}
    revealed = {
        b.party: {v.label.symbols for v in b.vectors if isinstance(v.label, RevealedTuple)}
        for b in s.bases
    }
    assert len(enumerate_color_patterns(net, 2, observed, revealed)) == 2

    spec = build_q_system(net, s.states, s.bases, ambiguous_event(), family="complete")
    block = reflection_block(0.2)
    for party in net.parties:
        for r in range(2):
            for t in (1, 2):
                target = spec.marginal_targets[(party, Ambiguous(r + 1), t)]
                assert abs(target - abs(block[r, t - 1]) ** 2 / 2) <= 1e-10

    # The same reflection coefficients that make the ring system infeasible.
    hits = []
    for lam in (0.05, 0.1, 0.2):
        netk, sk = make_complete_cm(4, lam=lam)
        verdict, report = certify_or_verdict(netk, sk)
        if verdict == VERDICT_NONLOCAL:
            assert verify_certificate(report.problem, report.result)
            hits.append((lam, report.margin))
    assert hits
    ok(7, f"K4: event mass 2^-5, two patterns, marginals; NONLOCAL at lam="
          f"{[f'{l}(margin {m:.2e})' for l, m in hits]}")


def test_criterion_08_graph_coloring_n5():
    net = build_edge_network(5)
    observed = {p: Ambiguous(0) for p in net.parties}
    assert len(enumerate_color_patterns(net, 5, observed)) == 120

    _, s = make_graph_coloring_cm(5, lam=0.25)
    revealed = {
        b.party: {v.label.symbols for v in b.vectors if isinstance(v.label, RevealedTuple)}
        for b in s.bases
    }
    assert len(enumerate_color_patterns(net, 5, observed, revealed)) == 2

    witness = None
    for lam in (0.25, 0.3, 0.2):  # scan, stop at the first certification
        netc, sc = make_graph_coloring_cm(5, lam=lam)
        verdict, report = certify_or_verdict(netc, sc)
        if verdict == VERDICT_NONLOCAL:
            assert verify_certificate(report.problem, report.result)
            witness = (lam, report.margin, report.lp_variables)
            break
    assert witness is not None, "no scanned omega choice certified"
    ok(8, f"coloring n=5: 120 proper colorings, 2 after pruning; NONLOCAL at lam={witness[0]} "
          f"(margin {witness[1]:.2e}, {witness[2]} LP variables)")


def test_criterion_09_decoherence_oracle():
    rng = np.random.default_rng(9)
    cases = []
    for draw in range(5):
        cases.append((make_5_0_tc(float(rng.uniform(0, math.pi / 4))), token_marginal))
        cases.append((make_ring_tc(3, blocks=[random_unitary(rng, 2) for _ in range(3)]),
                      token_marginal))
        cases.append((make_1_2_cm(float(rng.uniform(0, math.pi / 4))), color_marginal))
        cases.append((make_complete_cm(4, lam=float(rng.uniform(0.05, 0.95))), color_marginal))
        cases.append((make_graph_coloring_cm(5, lam=float(rng.uniform(0.05, 0.95))),
                      color_marginal))
    for (net, s), projection in cases:
        quantum = coarse_grain(joint_distribution(net, s.states, s.bases), projection)
        dec = decohere(net, s.states, s.bases)
        classical = coarse_grain(classical_joint(net, dec), projection)
        assert quantum.allclose(classical, 1e-10), f"oracle failed for {s.family}"
    ok(9, f"{len(cases)} strategy draws: coarse quantum marginal == decohered classical")


def _random_classical_strategy(net, rng):
    labels = [ColorMatch(0), ColorMatch(1), Ambiguous(0)]
    sources = []
    for sid in net.source_ids:
        deg = len(net.source_parties(sid))
        n_vals = int(rng.integers(2, 4))
        pmf = rng.dirichlet(np.ones(n_vals))
        sources.append(SourcePmf(sid, {
            tuple(int(x) for x in rng.integers(0, 2, size=deg)) + (v,): float(p)
            for v, p in enumerate(pmf)
        }))
    by_id = {s.source: s for s in sources}
    responses = []
    for party in net.parties:
        incident = net.party_sources(party)
        table = {}
        for combo in itertools.product(*[list(by_id[sid].values) for sid in incident]):
            pmf = rng.dirichlet(np.ones(len(labels)))
            table[combo] = {lbl: float(p) for lbl, p in zip(labels, pmf)}
        responses.append(ResponseMap(party, table))
    return ClassicalStrategy(sources, responses), labels


def test_criterion_10_finner_property_suite():
    rng = np.random.default_rng(10)
    one_two, _ = make_1_2_cm(0.0)
    nets = [build_ring(3), build_ring(4), build_ring(5), one_two]
    worst = math.inf
    for trial in range(200):
        net = nets[trial % len(nets)]
        weights = find_pfis(net)
        strat, labels = _random_classical_strategy(net, rng)
        pick = labels[int(rng.integers(0, len(labels)))]
        res = finner_check(strat, weights, {p: (lambda a, t=pick: a == t) for p in net.parties},
                           net=net)
        worst = min(worst, res.gap)
        assert res.gap >= -1e-10

    # Exact equality for uniform two-color matching indicators.
    for n in (3, 4, 5):
        net = build_ring(n)
        sources = [SourcePmf(sid, {(0, 0): 0.5, (1, 1): 0.5}) for sid in net.source_ids]
        by_id = {s.source: s for s in sources}
        responses = []
        for party in net.parties:
            incident = net.party_sources(party)
            table = {}
            for combo in itertools.product(*[list(by_id[sid].values) for sid in incident]):
                got = {
                    val[net.source_parties(sid).index(party)]
                    for sid, val in zip(incident, combo)
                }
                if len(got) == 1:
                    table[combo] = {ColorMatch(got.pop()): 1.0}
                else:
                    table[combo] = {Ambiguous(0): 1.0}
            responses.append(ResponseMap(party, table))
        strat = ClassicalStrategy(sources, responses)
        res = finner_check(strat, find_pfis(net),
                           {p: (lambda a: a == ColorMatch(0)) for p in net.parties}, net=net)
        assert abs(res.gap) <= 1e-10
        assert abs(res.lhs - 0.5 ** n) <= 1e-12
    ok(10, f"200 random strategies: min gap {worst:.2e} >= -1e-10; uniform CM equality exact")


def test_criterion_11_structural_checks():
    net, _ = make_1_2_cm(0.0)
    weights = find_pfis(net).as_dict()
    for party, expected in (("A", 0.5), ("B", 0.25), ("C", 0.25), ("D", 0.5)):
        assert abs(weights[party] - expected) <= 1e-9

    for n in (3, 4, 5, 6, 7):
        ring = build_ring(n)
        assert check_ndcs(ring) and check_ecs(ring) and find_pfis(ring) is not None
    for n in (4, 5):
        kn = build_complete(n)
        assert check_ecs(kn) and find_pfis(kn) is not None
    for n in (4, 5):
        edge = build_edge_network(n)
        assert check_ecs(edge) and find_pfis(edge) is not None

    fig2 = Network(
        ["A", "B", "C"],
        [("S1", ["A", "B", "C"]), ("S2", ["B", "C"])],
        allow_redundant=True,
    )
    assert not check_ndcs(fig2)
    assert not check_ecs(fig2)
    ok(11, "1-2 PFIS (1/2,1/4,1/4,1/2); rings/K_n/edge networks pass; figure-2 fails NDCS and ECS")


def test_criterion_12_lp_certificates():
    # Every pipeline result and both branches re-verify.
    emitted = []
    for maker in (
        lambda: make_5_0_tc(math.pi / 8),
        lambda: make_5_0_tc(0.0),
        lambda: make_ring_tc(3, lam=0.1),
        lambda: make_ring_tc(6, lam=0.1),
        lambda: make_ring_tc(6, lam=0.2, asym_last=True),
        lambda: make_1_2_cm(math.pi / 8),
        lambda: make_complete_cm(4, lam=0.2),
    ):
        net, s = maker()
        report = certify_nonlocality(net, s)
        assert verify_certificate(report.problem, report.result)
        emitted.append(report.verdict)

    rng = np.random.default_rng(12)
    for trial in range(100):
        m = int(rng.integers(1, 12))
        n = int(rng.integers(m, m + 20))
        a = rng.normal(size=(m, n)) * (rng.random(size=(m, n)) < 0.6)
        x = np.abs(rng.normal(size=n)) * (rng.random(size=n) < 0.7)
        b = a @ x
        prob = FeasibilityProblem(
            [f"v{k}" for k in range(n)],
            [Row({f"v{k}": float(a[r, k]) for k in range(n) if a[r, k] != 0.0},
                 float(b[r]), {"row": r}) for r in range(m)],
        )
        result = solve_feasibility(prob)
        assert result.feasible, f"false infeasibility on fuzz trial {trial}"
        assert verify_certificate(prob, result)
    ok(12, f"pipeline verdicts {emitted} all verified; 100 witness-built systems, zero false infeasibility")
