"""Bipartite source/party networks and their structural properties.

A network is a bipartite graph between sources and parties.  Sources keep an
ordered list of the parties they feed (the wire order of the distributed
state), and every party keeps an ordered list of its incident sources (the
subsystem order its measurement basis refers to).  Both orders are explicit
data: measurement bases are meaningless without them.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

# An interval bound of at least this much on every weight is required before a
# fractional independent set counts as strict (0 < x < 1).
PFIS_STRICTNESS = 1e-9


class NetworkError(ValueError):
    """A structural invariant of the network is violated."""


class Network:
    """Immutable network of sources wired to parties.

    Parameters
    ----------
    parties:
        Ordered party identifiers.
    sources:
        Ordered ``(source_id, connected_parties)`` pairs.  The party order of
        each source fixes the wire order of its distributed state.
    party_order:
        Optional ``{party: [source ids]}`` giving each party's subsystem
        order.  Defaults to the order in which sources are declared.
    allow_redundant:
        Permit a source whose party set contains another source's party set.
        Such networks break the usual modelling assumption (the smaller
        source could be merged into the larger) but are occasionally needed
        as counterexamples, so loading them is possible on request.
    """

    def __init__(self, parties, sources, party_order=None, *, allow_redundant=False):
        self.parties = tuple(parties)
        self.source_ids = tuple(sid for sid, _ in sources)
        self._source_parties = {sid: tuple(ps) for sid, ps in sources}
        if not self.parties:
            raise NetworkError("network has no parties")
        if not self.source_ids:
            raise NetworkError("network has no sources")
        if len(set(self.parties)) != len(self.parties):
            raise NetworkError("duplicate party identifiers")
        if len(set(self.source_ids)) != len(self.source_ids):
            raise NetworkError("duplicate source identifiers")
        party_set = set(self.parties)
        for sid, ps in self._source_parties.items():
            if not ps:
                raise NetworkError(f"source {sid} connects to no party")
            if len(set(ps)) != len(ps):
                raise NetworkError(f"source {sid} lists a party twice")
            unknown = set(ps) - party_set
            if unknown:
                raise NetworkError(f"source {sid} connects to unknown parties {sorted(unknown)}")

        incident = {p: [] for p in self.parties}
        for sid in self.source_ids:
            for p in self._source_parties[sid]:
                incident[p].append(sid)
        for p, srcs in incident.items():
            if not srcs:
                raise NetworkError(f"party {p} is connected to no source")

        if not allow_redundant:
            for sid, other in itertools.permutations(self.source_ids, 2):
                if set(self._source_parties[other]) <= set(self._source_parties[sid]):
                    raise NetworkError(
                        f"redundant sources: parties of {other} are contained in parties of {sid}"
                    )

        if party_order is None:
            self._party_sources = {p: tuple(srcs) for p, srcs in incident.items()}
        else:
            if set(party_order) != party_set:
                raise NetworkError("party_order keys do not match the parties")
            cleaned = {}
            for p in self.parties:
                order = tuple(party_order[p])
                if sorted(order) != sorted(incident[p]):
                    raise NetworkError(
                        f"party_order for {p} is not a permutation of its incident sources"
                    )
                cleaned[p] = order
            self._party_sources = cleaned

    # -- accessors ---------------------------------------------------------

    def source_parties(self, sid) -> tuple:
        """Parties fed by source `sid`, in wire order."""
        return self._source_parties[sid]

    def party_sources(self, party) -> tuple:
        """Sources incident to `party`, in subsystem order."""
        return self._party_sources[party]

    def wires(self) -> list[tuple]:
        """All (source, party) wires, grouped by source in declaration order."""
        return [(sid, p) for sid in self.source_ids for p in self._source_parties[sid]]

    def is_redundant(self) -> bool:
        return any(
            set(self._source_parties[b]) <= set(self._source_parties[a])
            for a, b in itertools.permutations(self.source_ids, 2)
        )

    def _key(self):
        return (
            self.parties,
            self.source_ids,
            tuple(self._source_parties[s] for s in self.source_ids),
            tuple(self._party_sources[p] for p in self.parties),
        )

    def __eq__(self, other):
        return isinstance(other, Network) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Network(parties={len(self.parties)}, sources={len(self.source_ids)})"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "parties": list(self.parties),
            "sources": [
                {"id": sid, "parties": list(self._source_parties[sid])}
                for sid in self.source_ids
            ],
            "party_order": {p: list(self._party_sources[p]) for p in self.parties},
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str, *, allow_redundant=False) -> "Network":
        try:
            doc = json.loads(text)
            parties = doc["parties"]
            sources = [(s["id"], s["parties"]) for s in doc["sources"]]
            party_order = doc.get("party_order")
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise NetworkError(f"malformed network document: {exc}") from exc
        return cls(parties, sources, party_order, allow_redundant=allow_redundant)


@dataclass(frozen=True)
class PfisWeights:
    """Party weights of a perfect fractional independent set."""

    weights: tuple  # ordered (party, weight) pairs

    def as_dict(self) -> dict:
        return dict(self.weights)

    def __getitem__(self, party) -> float:
        return self.as_dict()[party]

    def is_valid_for(self, net: Network, tol: float = PFIS_STRICTNESS) -> bool:
        w = self.as_dict()
        if set(w) != set(net.parties):
            return False
        if any(not (tol < x < 1.0 - tol) for x in w.values()):
            return False
        return all(
            abs(sum(w[p] for p in net.source_parties(sid)) - 1.0) <= 1e-9
            for sid in net.source_ids
        )


def check_ndcs(net: Network) -> bool:
    """True iff no two parties share more than one common source."""
    for a, b in itertools.combinations(net.parties, 2):
        common = set(net.party_sources(a)) & set(net.party_sources(b))
        if len(common) >= 2:
            return False
    return True


def check_ecs(net: Network) -> bool:
    """True iff every source is the exclusive common source of some party pair."""
    for sid in net.source_ids:
        connected = net.source_parties(sid)
        for a, b in itertools.combinations(connected, 2):
            common = set(net.party_sources(a)) & set(net.party_sources(b))
            if common == {sid}:
                break
        else:
            return False
    return True


def find_pfis(net: Network) -> PfisWeights | None:
    """Search for perfect fractional independent set weights.

    Solves the LP maximizing the minimum distance of the weights from {0, 1}
    subject to every source's neighborhood summing to one.  Returns weights
    only when that distance exceeds ``PFIS_STRICTNESS``; absence is a value,
    not an error.
    """
    parties = net.parties
    nv = len(parties)
    idx = {p: k for k, p in enumerate(parties)}
    # Variables: x_1..x_J, s.  Maximize s.
    c = np.zeros(nv + 1)
    c[-1] = -1.0
    a_eq = np.zeros((len(net.source_ids), nv + 1))
    for r, sid in enumerate(net.source_ids):
        for p in net.source_parties(sid):
            a_eq[r, idx[p]] = 1.0
    b_eq = np.ones(len(net.source_ids))
    # s <= x_j and x_j <= 1 - s for every party.
    a_ub = np.zeros((2 * nv, nv + 1))
    b_ub = np.zeros(2 * nv)
    for k in range(nv):
        a_ub[2 * k, k] = -1.0
        a_ub[2 * k, -1] = 1.0
        a_ub[2 * k + 1, k] = 1.0
        a_ub[2 * k + 1, -1] = 1.0
        b_ub[2 * k + 1] = 1.0
    bounds = [(0.0, 1.0)] * nv + [(0.0, 0.5)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not res.success or -res.fun <= PFIS_STRICTNESS:
        return None
    weights = PfisWeights(tuple((p, float(res.x[idx[p]])) for p in parties))
    if not weights.is_valid_for(net):
        return None
    return weights


# -- catalog topologies ----------------------------------------------------


def build_ring(n: int) -> Network:
    """Ring of n bipartite sources: S_i feeds A_i and A_{i+1} (indices mod n).

    Party A_j sorts its subsystems as (S_{j-1}, S_j), so the first wire
    carries the token arriving from the previous source on the ring.
    """
    if n < 3:
        raise NetworkError("ring networks need n >= 3")
    parties = [f"A{j}" for j in range(1, n + 1)]
    sources = [(f"S{i}", [f"A{i}", f"A{i % n + 1}"]) for i in range(1, n + 1)]
    order = {f"A{j}": [f"S{(j - 2) % n + 1}", f"S{j}"] for j in range(1, n + 1)}
    return Network(parties, sources, order)


def build_complete(n: int) -> Network:
    """Complete network K_n: one bipartite source per party pair.

    Party A_j sorts its n-1 subsystems clockwise: the qubit shared with
    A_{j+1} first, then A_{j+2}, ..., ending with A_{j-1}.
    """
    if n < 3:
        raise NetworkError("complete networks need n >= 3")
    parties = [f"A{j}" for j in range(1, n + 1)]

    def pair_id(a, b):
        a, b = sorted((a, b))
        return f"S{a}-{b}"

    sources = [
        (pair_id(a, b), [f"A{a}", f"A{b}"])
        for a, b in itertools.combinations(range(1, n + 1), 2)
    ]
    order = {}
    for j in range(1, n + 1):
        ring = [(j + k - 1) % n + 1 for k in range(1, n)]
        order[f"A{j}"] = [pair_id(j, m) for m in ring]
    return Network(parties, sources, order)


def build_edge_network(n: int) -> Network:
    """Network of a complete graph read the other way around.

    The n sources sit on the graph vertices; every edge {i, j} becomes a
    party A_{i-j} connected to S_i and S_j (lower index first).
    """
    if n < 3:
        raise NetworkError("edge networks need n >= 3")
    sources = [(f"S{i}", [f"A{i}-{j}" if i < j else f"A{j}-{i}" for j in range(1, n + 1) if j != i])
               for i in range(1, n + 1)]
    parties = [f"A{a}-{b}" for a, b in itertools.combinations(range(1, n + 1), 2)]
    order = {f"A{a}-{b}": [f"S{a}", f"S{b}"] for a, b in itertools.combinations(range(1, n + 1), 2)}
    return Network(parties, sources, order)
