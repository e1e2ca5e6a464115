"""Constructors for the analyzed network/strategy families.

Every builder returns ``(Network, Strategy)`` with the exact source states,
measurement bases and wire orientations of the corresponding family:

* ``5-0``: four parties on five bipartite one-token sources; A and C carry
  three superposed provenance rows, B and D two.
* ``ring:n``: n-cycles of bipartite one-token sources.
* ``1-2``: one bipartite and two tripartite three-color sources.
* ``kn:n``: the complete network on n parties with two-color sources.
* ``coloring:n``: n sources on the vertices of a complete graph, one party
  per edge, n colors; ambiguity encodes proper colorings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import Network, build_complete, build_edge_network, build_ring
from .outcomes import Ambiguous, ColorMatch, RevealedTuple, TokenCount
from .quantum import BasisVector, MeasurementBasis, SourceState, Strategy

ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class RotationParams:
    """Measurement-basis parameters derived from plane rotations."""

    theta: float

    @property
    def r3(self) -> np.ndarray:
        """Rotation of angle theta around the x-axis of R^3."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])

    @property
    def r2(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s], [s, c]])

    def __post_init__(self):
        for mat in (self.r3, self.r2):
            if np.max(np.abs(mat @ mat.T - np.eye(len(mat)))) > ORTHO_TOL:
                raise ValueError("rotation matrices must be orthogonal")


def reflection_block(lam: float) -> np.ndarray:
    """The 2x2 orthogonal block [[lam, mu], [mu, -lam]] with mu = sqrt(1-lam^2)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    mu = math.sqrt(1.0 - lam * lam)
    return np.array([[lam, mu], [mu, -lam]])


def _require_unitary(mat: np.ndarray, what: str, tol: float = 1e-9) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{what} must be a square matrix")
    if np.max(np.abs(mat @ mat.conj().T - np.eye(len(mat)))) > tol:
        raise ValueError(f"{what} must have orthonormal rows")
    return mat


def _vector(label, components, tuples) -> BasisVector:
    amps = {t: complex(a) for t, a in zip(tuples, components) if a != 0}
    return BasisVector(label, amps)


def _computational(label, t) -> BasisVector:
    return BasisVector(label, {tuple(t): 1.0 + 0.0j})


def _pair_state(dims=(2, 2)) -> dict:
    return {(0, 1): 1 / math.sqrt(2), (1, 0): 1 / math.sqrt(2)}


# -- 5-0 network --------------------------------------------------------------


def make_5_0_tc(theta=0.0, *, a3=None, b2=None, c3=None, d2=None):
    """The four-party network of five bipartite one-token sources.

    By default A and C share the rows of the x-axis rotation and B and D the
    rows of the plane rotation at the given angle; explicit row matrices
    (a3, c3 of size 3x3; b2, d2 of size 2x2) override the rotation choice.

    Wire orientation, chosen so that the three hidden routings of the
    all-ambiguous event hit the provenance rows in column order:
    A:(S4,S5,S1), B:(S1,S2), C:(S2,S5,S3), D:(S3,S4).
    """
    if isinstance(theta, RotationParams):
        params = theta
    else:
        params = RotationParams(float(theta))
    a3 = _require_unitary(params.r3 if a3 is None else a3, "a3")
    c3 = _require_unitary(params.r3 if c3 is None else c3, "c3")
    b2 = _require_unitary(params.r2 if b2 is None else b2, "b2")
    d2 = _require_unitary(params.r2 if d2 is None else d2, "d2")
    if a3.shape != (3, 3) or c3.shape != (3, 3) or b2.shape != (2, 2) or d2.shape != (2, 2):
        raise ValueError("expected 3x3 rows for A and C, 2x2 rows for B and D")

    net = Network(
        parties=["A", "B", "C", "D"],
        sources=[
            ("S1", ["A", "B"]),
            ("S2", ["B", "C"]),
            ("S3", ["C", "D"]),
            ("S4", ["D", "A"]),
            ("S5", ["A", "C"]),
        ],
        party_order={
            "A": ["S4", "S5", "S1"],
            "B": ["S1", "S2"],
            "C": ["S2", "S5", "S3"],
            "D": ["S3", "S4"],
        },
    )
    states = [SourceState(sid, (2, 2), _pair_state(), eta=1) for sid in net.source_ids]

    single = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    double = [(1, 1, 0), (1, 0, 1), (0, 1, 1)]
    basis_a = MeasurementBasis("A", [
        _computational(TokenCount(0), (0, 0, 0)),
        *[_vector(TokenCount(1, i + 1), a3[i], single) for i in range(3)],
        *[_computational(RevealedTuple(t), t) for t in double],
        _computational(TokenCount(3), (1, 1, 1)),
    ])
    basis_c = MeasurementBasis("C", [
        _computational(TokenCount(0), (0, 0, 0)),
        *[_computational(RevealedTuple(t), t) for t in [(0, 0, 1), (0, 1, 0), (1, 0, 0)]],
        *[_vector(TokenCount(2, k + 1), c3[k], double) for k in range(3)],
        _computational(TokenCount(3), (1, 1, 1)),
    ])
    pair = [(1, 0), (0, 1)]
    basis_b = MeasurementBasis("B", [
        _computational(TokenCount(0), (0, 0)),
        *[_vector(TokenCount(1, j + 1), b2[j], pair) for j in range(2)],
        _computational(TokenCount(2), (1, 1)),
    ])
    basis_d = MeasurementBasis("D", [
        _computational(TokenCount(0), (0, 0)),
        *[_vector(TokenCount(1, l + 1), d2[l], pair) for l in range(2)],
        _computational(TokenCount(2), (1, 1)),
    ])

    strategy = Strategy(
        network=net,
        states=states,
        bases=[basis_a, basis_b, basis_c, basis_d],
        kind="tc",
        family="5-0",
        params={"theta": getattr(params, "theta", None)},
    )
    return net, strategy


# -- ring networks ------------------------------------------------------------


def ring_blocks(n: int, lam: float, *, asym_last: bool = False) -> list[np.ndarray]:
    """Per-party reflection blocks, optionally balancing the last party."""
    blocks = [reflection_block(lam) for _ in range(n)]
    if asym_last:
        blocks[-1] = reflection_block(1 / math.sqrt(2))
    return blocks


def make_ring_tc(n: int, blocks=None, *, lam=None, theta=None, asym_last: bool = False):
    """Ring of n bipartite one-token sources.

    Each party measures {|00>, v_1, v_2, |11>} on the pair (previous source,
    own source); block row r gives the components of v_r on |01> and |10>.
    """
    if blocks is None:
        if lam is None:
            lam = math.sin(theta) if theta is not None else 0.0
        blocks = ring_blocks(n, lam, asym_last=asym_last)
    if len(blocks) != n:
        raise ValueError(f"expected {n} blocks")
    blocks = [_require_unitary(b, f"block {j}") for j, b in enumerate(blocks)]
    if any(b.shape != (2, 2) for b in blocks):
        raise ValueError("ring blocks must be 2x2")

    net = build_ring(n)
    states = [SourceState(sid, (2, 2), _pair_state(), eta=1) for sid in net.source_ids]
    bases = []
    pair = [(0, 1), (1, 0)]
    for j, party in enumerate(net.parties):
        bases.append(MeasurementBasis(party, [
            _computational(TokenCount(0), (0, 0)),
            *[_vector(TokenCount(1, r + 1), blocks[j][r], pair) for r in range(2)],
            _computational(TokenCount(2), (1, 1)),
        ]))
    strategy = Strategy(
        network=net, states=states, bases=bases, kind="tc", family="ring",
        params={"n": n, "lam": lam, "theta": theta, "asym_last": asym_last},
    )
    return net, strategy


def ring_cm_twin(n: int, blocks):
    """The two-color CM strategy a bit-flip at even parties turns a ring into.

    Only defined for even n: flipping both received qubits at every even
    party maps the one-token source states onto (|00>+|11>)/sqrt(2) while
    keeping the basis structure, so the resulting strategy distributes two
    colors and checks matches.
    """
    if n % 2 != 0:
        raise ValueError("the CM twin exists for even rings only")
    blocks = [_require_unitary(b, f"block {j}") for j, b in enumerate(blocks)]
    net = build_ring(n)
    phi = {(0, 0): 1 / math.sqrt(2), (1, 1): 1 / math.sqrt(2)}
    states = [SourceState(sid, (2, 2), dict(phi)) for sid in net.source_ids]
    bases = []
    for j, party in enumerate(net.parties):
        # The flip at even parties moves the block components to the
        # swapped off-diagonal pair; the match rows stay where they are.
        odd = (j + 1) % 2 == 1
        pair = [(0, 1), (1, 0)] if odd else [(1, 0), (0, 1)]
        bases.append(MeasurementBasis(party, [
            _computational(ColorMatch(0), (0, 0)),
            *[_vector(Ambiguous(r + 1), blocks[j][r], pair) for r in range(2)],
            _computational(ColorMatch(1), (1, 1)),
        ]))
    strategy = Strategy(
        network=net, states=states, bases=bases, kind="cm", family="ring-cm-twin",
        params={"n": n},
    )
    return net, strategy


def ring_twin_label_map(party_index: int):
    """Label bijection under the even-party bit flip (party index 1-based)."""
    odd = party_index % 2 == 1

    def convert(label):
        if isinstance(label, TokenCount) and label.alpha is not None:
            return Ambiguous(label.alpha)
        if isinstance(label, TokenCount):
            high = label.n == 2
            return ColorMatch(int(high if odd else not high))
        raise ValueError(f"unexpected ring label {label!r}")

    return convert


# -- 1-2 network --------------------------------------------------------------


def make_1_2_cm(theta=0.0, *, omegas=None):
    """Four parties on one bipartite and two tripartite three-color sources.

    Each party's nine rows: three color matches, three revealed color pairs
    (the anti-cyclic colorings), three superposed rows over the cyclic ones.
    By default every party uses the rows of the x-axis rotation.
    """
    if isinstance(theta, RotationParams):
        params = theta
    else:
        params = RotationParams(float(theta))
    if omegas is None:
        omegas = {p: params.r3 for p in ("A", "B", "C", "D")}
    omegas = {p: _require_unitary(m, f"omega[{p}]") for p, m in omegas.items()}
    if set(omegas) != {"A", "B", "C", "D"} or any(m.shape != (3, 3) for m in omegas.values()):
        raise ValueError("expected a 3x3 row matrix per party")

    net = Network(
        parties=["A", "B", "C", "D"],
        sources=[
            ("S1", ["A", "D"]),
            ("S2", ["A", "B", "C"]),
            ("S3", ["B", "C", "D"]),
        ],
        party_order={
            "A": ["S1", "S2"],
            "B": ["S2", "S3"],
            "C": ["S2", "S3"],
            "D": ["S3", "S1"],
        },
    )
    amp = 1 / math.sqrt(3)
    states = [
        SourceState("S1", (3, 3), {(c, c): amp for c in range(3)}),
        SourceState("S2", (3, 3, 3), {(c, c, c): amp for c in range(3)}),
        SourceState("S3", (3, 3, 3), {(c, c, c): amp for c in range(3)}),
    ]

    revealed = {
        "A": [(2, 1), (1, 0), (0, 2)],
        "B": [(1, 0), (0, 2), (2, 1)],
        "C": [(1, 0), (0, 2), (2, 1)],
        "D": [(0, 2), (2, 1), (1, 0)],
    }
    cyclic = {
        "A": [(0, 1), (1, 2), (2, 0)],
        "B": [(1, 2), (2, 0), (0, 1)],
        "C": [(1, 2), (2, 0), (0, 1)],
        "D": [(2, 0), (0, 1), (1, 2)],
    }
    bases = []
    for party in net.parties:
        bases.append(MeasurementBasis(party, [
            *[_computational(ColorMatch(c), (c, c)) for c in range(3)],
            *[_computational(RevealedTuple(t), t) for t in revealed[party]],
            *[_vector(Ambiguous(i + 1), omegas[party][i], cyclic[party]) for i in range(3)],
        ]))
    strategy = Strategy(
        network=net, states=states, bases=bases, kind="cm", family="1-2",
        params={"theta": getattr(params, "theta", None)},
    )
    return net, strategy


# -- complete networks --------------------------------------------------------


def make_complete_cm(n: int, blocks=None, *, lam=None, theta=None):
    """Complete network K_n with two-color sources on every party pair.

    Parties measure the color computational basis except on the plane
    spanned by the two "adjacent vs internal" patterns, where the block rows
    define two superposed vectors.
    """
    if n < 4:
        raise ValueError("the complete-network family needs n >= 4")
    if blocks is None:
        if lam is None:
            lam = math.sin(theta) if theta is not None else 0.0
        blocks = [reflection_block(lam) for _ in range(n)]
    blocks = [_require_unitary(b, f"block {j}") for j, b in enumerate(blocks)]
    if len(blocks) != n or any(b.shape != (2, 2) for b in blocks):
        raise ValueError(f"expected {n} blocks of size 2x2")

    net = build_complete(n)
    amp = 1 / math.sqrt(2)
    states = [SourceState(sid, (2, 2), {(0, 0): amp, (1, 1): amp}) for sid in net.source_ids]

    pat01 = (0,) + (1,) * (n - 3) + (0,)
    pat10 = (1,) + (0,) * (n - 3) + (1,)
    bases = []
    for j, party in enumerate(net.parties):
        vectors = []
        for bits in np.ndindex(*(2,) * (n - 1)):
            t = tuple(int(b) for b in bits)
            if t in (pat01, pat10):
                continue
            if all(b == 0 for b in t):
                vectors.append(_computational(ColorMatch(0), t))
            elif all(b == 1 for b in t):
                vectors.append(_computational(ColorMatch(1), t))
            else:
                vectors.append(_computational(RevealedTuple(t), t))
        for r in range(2):
            vectors.append(_vector(Ambiguous(r + 1), blocks[j][r], [pat01, pat10]))
        bases.append(MeasurementBasis(party, vectors))
    strategy = Strategy(
        network=net, states=states, bases=bases, kind="cm", family="complete",
        params={"n": n, "lam": lam, "theta": theta},
    )
    return net, strategy


# -- graph-coloring networks --------------------------------------------------


def coloring_span_pairs(n: int, i: int, j: int) -> list[tuple[int, int]]:
    """Ambiguous color pairs of party A_{i-j} (0-based colors).

    A pair (a, b) with distinct colors is ambiguous when its 1-based sum
    lands on i+j or on 2(n+1)-(i+j); the two proper-coloring patterns
    (identity and reversal) always deliver such pairs.
    """
    allowed = {i + j - 2, 2 * n - i - j}
    return [
        (a, b)
        for a in range(n)
        for b in range(n)
        if a != b and a + b in allowed
    ]


def make_graph_coloring_cm(n: int, *, lam=None, theta=None, blocks=None, asym: bool = True):
    """Graph-coloring network: n sources as vertices, one party per edge.

    Each party's ambiguous subspace consists of the distinct-color pairs
    hitting the two allowed sums; the default measurement superposes only
    the two pairs delivered by the identity and reversed colorings (which
    keeps the event support small) and leaves the remaining ambiguous
    directions computational.  With ``asym`` the lexicographically last
    party gets the balanced block, the choice that makes the associated
    constraint system infeasible at small lambda.
    """
    if n < 5:
        raise ValueError("the graph-coloring family needs n >= 5")
    net = build_edge_network(n)
    if blocks is None:
        if lam is None:
            lam = math.sin(theta) if theta is not None else 0.0
        blocks = {p: reflection_block(lam) for p in net.parties}
        if asym:
            blocks[net.parties[-1]] = reflection_block(1 / math.sqrt(2))
    blocks = {p: _require_unitary(b, f"block {p}") for p, b in blocks.items()}
    if set(blocks) != set(net.parties) or any(b.shape != (2, 2) for b in blocks.values()):
        raise ValueError("expected a 2x2 block per party")

    amp = 1 / math.sqrt(n)
    states = [
        SourceState(sid, (n,) * len(net.source_parties(sid)),
                    {(c,) * len(net.source_parties(sid)): amp for c in range(n)})
        for sid in net.source_ids
    ]

    bases = []
    for party in net.parties:
        i, j = (int(x) for x in party[1:].split("-"))
        span = coloring_span_pairs(n, i, j)
        p1 = (i - 1, j - 1)
        p2 = (n - i, n - j)
        rest = sorted(t for t in span if t not in (p1, p2))
        vectors = [_computational(ColorMatch(c), (c, c)) for c in range(n)]
        block = blocks[party]
        vectors.append(_vector(Ambiguous(1), block[0], [p1, p2]))
        vectors.append(_vector(Ambiguous(2), block[1], [p1, p2]))
        for r, t in enumerate(rest, start=3):
            vectors.append(_computational(Ambiguous(r), t))
        span_set = set(span)
        for a in range(n):
            for b in range(n):
                if a != b and (a, b) not in span_set:
                    vectors.append(_computational(RevealedTuple((a, b)), (a, b)))
        bases.append(MeasurementBasis(party, vectors))
    strategy = Strategy(
        network=net, states=states, bases=bases, kind="cm", family="coloring",
        params={"n": n, "lam": lam, "theta": theta, "asym": asym},
    )
    return net, strategy


# -- name resolution for the CLI ----------------------------------------------


def resolve(name: str):
    """Map a catalog name like ``ring:5`` to ``(family, size)``."""
    if name == "5-0":
        return "5-0", None
    if name == "1-2":
        return "1-2", None
    for prefix, family in (("ring:", "ring"), ("kn:", "complete"), ("coloring:", "coloring")):
        if name.startswith(prefix):
            try:
                n = int(name[len(prefix):])
            except ValueError:
                raise ValueError(f"bad catalog size in {name!r}") from None
            return family, n
    raise ValueError(
        f"unknown catalog name {name!r}; expected 5-0, 1-2, ring:n, kn:n or coloring:n"
    )


def build(name: str, *, theta=None, lam=None, asym_last=False):
    """Build a catalog strategy from a CLI-style name and parameters."""
    family, n = resolve(name)
    if family == "5-0":
        return make_5_0_tc(theta or 0.0)
    if family == "1-2":
        return make_1_2_cm(theta or 0.0)
    if family == "ring":
        return make_ring_tc(n, lam=lam, theta=theta, asym_last=asym_last)
    if family == "complete":
        return make_complete_cm(n, lam=lam, theta=theta)
    return make_graph_coloring_cm(n, lam=lam, theta=theta)
