"""Classical network strategies and hidden-pattern enumeration.

A classical strategy assigns each source a finite alphabet with a pmf and
each party a (possibly probabilistic) response map from the tuple of
received source values to outcome labels.  Hidden patterns are the global
token routings or source colorings that the rigidity arguments quantify
over; they are enumerated in lexicographic order so reports can be
cross-referenced by hand.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .network import Network
from .outcomes import (
    Ambiguous,
    ColorMatch,
    JointDistribution,
    RevealedTuple,
    label_from_json,
    label_to_json,
)

PMF_TOL = 1e-12


class StrategyError(ValueError):
    """A strategy violates one of its invariants."""


def _check_pmf(values, where):
    total = 0.0
    for v in values:
        if v < -PMF_TOL:
            raise StrategyError(f"negative probability in {where}")
        total += v
    if abs(total - 1.0) > PMF_TOL:
        raise StrategyError(f"pmf in {where} sums to {total!r}, not 1")


@dataclass
class SourcePmf:
    """Finite alphabet of a classical source with its distribution."""

    source: str
    values: dict  # symbol -> probability

    def validate(self):
        if not self.values:
            raise StrategyError(f"source {self.source} has an empty alphabet")
        _check_pmf(self.values.values(), f"source {self.source}")


@dataclass
class ResponseMap:
    """Response pmfs of one party, keyed by the tuple of received values."""

    party: str
    table: dict  # received symbols tuple -> {label: probability}

    def validate(self):
        if not self.table:
            raise StrategyError(f"party {self.party} has an empty response map")
        for received, pmf in self.table.items():
            _check_pmf(pmf.values(), f"response of {self.party} at {received!r}")


@dataclass
class ClassicalStrategy:
    sources: list[SourcePmf]
    responses: list[ResponseMap]

    def validate(self):
        for s in self.sources:
            s.validate()
        for r in self.responses:
            r.validate()

    def source_map(self) -> dict:
        return {s.source: s for s in self.sources}

    def response_map(self) -> dict:
        return {r.party: r for r in self.responses}

    def to_json(self) -> str:
        def encode_symbol(sym):
            return list(sym) if isinstance(sym, tuple) else sym

        doc = {
            "sources": [
                {
                    "id": s.source,
                    "values": [
                        {"symbol": encode_symbol(sym), "p": p}
                        for sym, p in sorted(s.values.items(), key=lambda kv: json.dumps(encode_symbol(kv[0])))
                    ],
                }
                for s in self.sources
            ],
            "parties": [
                {
                    "id": r.party,
                    "response": [
                        {
                            "received": [encode_symbol(sym) for sym in received],
                            "outcomes": [
                                {"label": label_to_json(lbl), "p": p}
                                for lbl, p in sorted(pmf.items(), key=lambda kv: json.dumps(label_to_json(kv[0]), sort_keys=True))
                            ],
                        }
                        for received, pmf in sorted(
                            r.table.items(),
                            key=lambda kv: json.dumps([encode_symbol(s) for s in kv[0]]),
                        )
                    ],
                }
                for r in self.responses
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ClassicalStrategy":
        def decode_symbol(sym):
            return tuple(sym) if isinstance(sym, list) else sym

        doc = json.loads(text)
        sources = [
            SourcePmf(s["id"], {decode_symbol(v["symbol"]): v["p"] for v in s["values"]})
            for s in doc["sources"]
        ]
        responses = [
            ResponseMap(
                r["id"],
                {
                    tuple(decode_symbol(s) for s in row["received"]): {
                        label_from_json(o["label"]): o["p"] for o in row["outcomes"]
                    }
                    for row in r["response"]
                },
            )
            for r in doc["parties"]
        ]
        return cls(sources, responses)


def classical_joint(net: Network, strat: ClassicalStrategy, *, product_cap: int = 10_000_000) -> JointDistribution:
    """Exact joint output distribution of a classical strategy (sum over all
    source-value combinations)."""
    strat.validate()
    sources = strat.source_map()
    responses = strat.response_map()
    if set(sources) != set(net.source_ids):
        raise StrategyError("strategy sources do not match the network")
    if set(responses) != set(net.parties):
        raise StrategyError("strategy parties do not match the network")

    size = 1
    for s in net.source_ids:
        size *= len(sources[s].values)
        if size > product_cap:
            raise StrategyError(f"source alphabet product exceeds cap {product_cap}")

    alphabets = [list(sources[s].values.items()) for s in net.source_ids]
    atoms: dict[tuple, float] = {}
    for combo in itertools.product(*alphabets):
        p_src = 1.0
        values = {}
        for sid, (sym, p) in zip(net.source_ids, combo):
            p_src *= p
            values[sid] = sym
        if p_src == 0.0:
            continue
        per_party = []
        for party in net.parties:
            received = tuple(values[sid] for sid in net.party_sources(party))
            pmf = responses[party].table.get(received)
            if pmf is None:
                raise StrategyError(
                    f"party {party} has no response for received values {received!r}"
                )
            per_party.append([(lbl, q) for lbl, q in pmf.items() if q > 0.0])
        for labelled in itertools.product(*per_party):
            prob = p_src
            for _, q in labelled:
                prob *= q
            key = tuple(lbl for lbl, _ in labelled)
            atoms[key] = atoms.get(key, 0.0) + prob
    return JointDistribution(net.parties, atoms)


# -- hidden patterns ---------------------------------------------------------


@dataclass
class HiddenPattern:
    """A global token routing or source coloring consistent with an event."""

    kind: str  # "token" or "coloring"
    index: int  # 1-based rank in lexicographic order
    routing: dict | None = None  # (source, party) -> token count
    colors: dict | None = None  # source -> color

    def delivered(self, net: Network, party) -> tuple:
        """Computational symbols arriving at `party`, in its wire order."""
        if self.kind == "token":
            return tuple(self.routing[(sid, party)] for sid in net.party_sources(party))
        return tuple(self.colors[sid] for sid in net.party_sources(party))

    def source_value(self, net: Network, sid) -> tuple:
        """The tuple this pattern makes source `sid` send, in its wire order."""
        if self.kind == "token":
            return tuple(self.routing[(sid, p)] for p in net.source_parties(sid))
        deg = len(net.source_parties(sid))
        return (self.colors[sid],) * deg

    def to_json(self) -> dict:
        if self.kind == "token":
            return {
                "kind": "token",
                "index": self.index,
                "routing": [
                    {"source": s, "party": p, "tokens": t}
                    for (s, p), t in sorted(self.routing.items())
                ],
            }
        return {
            "kind": "coloring",
            "index": self.index,
            "colors": {s: c for s, c in sorted(self.colors.items())},
        }


def _compositions(total: int, k: int):
    """All k-tuples of nonnegative integers summing to `total`, lexicographic."""
    if k == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def enumerate_token_patterns(net: Network, eta: dict, target: dict) -> list[HiddenPattern]:
    """All token routings with source budgets `eta` and party sums `target`.

    Returns the empty list when the budgets cannot possibly meet the target
    (total mismatch).  Patterns are indexed in lexicographic order of their
    routing maps, sources in network order.
    """
    if sum(eta[s] for s in net.source_ids) != sum(target[p] for p in net.parties):
        return []
    per_source = [
        [dict(zip(net.source_parties(sid), comp)) for comp in _compositions(eta[sid], len(net.source_parties(sid)))]
        for sid in net.source_ids
    ]
    patterns = []
    for combo in itertools.product(*per_source):
        sums = {p: 0 for p in net.parties}
        for sid, sent in zip(net.source_ids, combo):
            for p, t in sent.items():
                sums[p] += t
        if all(sums[p] == target[p] for p in net.parties):
            routing = {
                (sid, p): t
                for sid, sent in zip(net.source_ids, combo)
                for p, t in sent.items()
            }
            patterns.append(HiddenPattern("token", 0, routing=routing))
    for rank, pat in enumerate(patterns, start=1):
        pat.index = rank
    return patterns


def enumerate_color_patterns(
    net: Network,
    n_colors: int,
    observed: dict,
    basis_revealed: dict | None = None,
    *,
    enumeration_cap: int = 10_000_000,
) -> list[HiddenPattern]:
    """All source colorings consistent with the observed labels.

    ``observed`` maps each party to its label.  A ``ColorMatch(c)`` forces
    every incident source to ``c``; a ``RevealedTuple`` forces the stated
    colors wire by wire; an ``Ambiguous`` label forbids all-equal incident
    colors and forbids any delivery listed in ``basis_revealed`` for that
    party (the revealed rows of its measurement basis, which a consistent
    classical strategy would have to announce faithfully).
    """
    if set(observed) != set(net.parties):
        raise StrategyError("observed labels must cover every party")
    basis_revealed = basis_revealed or {}
    if n_colors ** len(net.source_ids) > enumeration_cap:
        raise StrategyError("coloring enumeration exceeds cap")

    revealed_sets = {p: set(map(tuple, basis_revealed.get(p, ()))) for p in net.parties}
    patterns = []
    for combo in itertools.product(range(n_colors), repeat=len(net.source_ids)):
        colors = dict(zip(net.source_ids, combo))
        ok = True
        for party in net.parties:
            got = tuple(colors[sid] for sid in net.party_sources(party))
            label = observed[party]
            if isinstance(label, ColorMatch):
                if any(c != label.color for c in got):
                    ok = False
            elif isinstance(label, RevealedTuple):
                if got != label.symbols:
                    ok = False
            elif isinstance(label, Ambiguous):
                if len(set(got)) == 1 or got in revealed_sets[party]:
                    ok = False
            else:
                raise StrategyError(f"unsupported observed label {label!r}")
            if not ok:
                break
        if ok:
            patterns.append(HiddenPattern("coloring", 0, colors=colors))
    for rank, pat in enumerate(patterns, start=1):
        pat.index = rank
    return patterns
