"""Exact simulation of no-input quantum network strategies.

Each source distributes a pure state over the wires to its parties; each
party measures its received subsystems in an orthonormal basis whose vectors
carry semantic outcome labels.  The joint output distribution is computed by
exact contraction, either densely over the global composite space or, for
large product spaces, by summing over the (sparse) computational support of
the product state.  Both paths evaluate the same Born-rule expression.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .classical import ClassicalStrategy, ResponseMap, SourcePmf
from .network import Network
from .outcomes import (
    JointDistribution,
    Label,
    label_from_json,
    label_sort_key,
    label_to_json,
)

NORM_TOL = 1e-12
ORTHO_TOL = 1e-10
DEFAULT_AMPLITUDE_CAP = 2 ** 24
DEFAULT_PATTERN_CAP = 2_000_000


class DimensionError(ValueError):
    """The requested contraction exceeds the configured size caps."""


class InvalidStrategyError(ValueError):
    """Raised when an operation requires a strategy that failed validation."""

    def __init__(self, report):
        self.report = report
        super().__init__("invalid strategy:\n" + str(report))


@dataclass
class SourceState:
    """Pure state distributed by one source.

    ``dims`` lists the local dimension of each wire, in the source's party
    order; ``amplitudes`` maps support tuples (one symbol per wire) to
    complex amplitudes.  ``eta`` declares the token budget of a
    token-counting source, enabling the support-sum check.
    """

    source: str
    dims: tuple[int, ...]
    amplitudes: dict
    eta: int | None = None

    def support(self):
        return self.amplitudes.keys()

    def to_json(self) -> dict:
        doc = {
            "id": self.source,
            "dims": list(self.dims),
            "amplitudes": [
                {"tuple": list(t), "re": complex(a).real, "im": complex(a).imag}
                for t, a in sorted(self.amplitudes.items())
            ],
        }
        if self.eta is not None:
            doc["eta"] = self.eta
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "SourceState":
        return cls(
            doc["id"],
            tuple(doc["dims"]),
            {tuple(a["tuple"]): complex(a["re"], a["im"]) for a in doc["amplitudes"]},
            doc.get("eta"),
        )


@dataclass
class BasisVector:
    label: Label
    amplitudes: dict  # received tuple -> complex amplitude


@dataclass
class MeasurementBasis:
    """Projective measurement of one party, given as labelled basis vectors."""

    party: str
    vectors: list[BasisVector]

    def labels(self):
        return [v.label for v in self.vectors]

    def to_json(self) -> dict:
        return {
            "id": self.party,
            "basis": [
                {
                    "label": label_to_json(v.label),
                    "amplitudes": [
                        {"tuple": list(t), "re": complex(a).real, "im": complex(a).imag}
                        for t, a in sorted(v.amplitudes.items())
                    ],
                }
                for v in self.vectors
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MeasurementBasis":
        return cls(
            doc["id"],
            [
                BasisVector(
                    label_from_json(v["label"]),
                    {tuple(a["tuple"]): complex(a["re"], a["im"]) for a in v["amplitudes"]},
                )
                for v in doc["basis"]
            ],
        )


@dataclass
class Violation:
    kind: str
    where: str
    detail: str

    def __str__(self):
        return f"[{self.kind}] {self.where}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind, where, detail):
        self.violations.append(Violation(kind, where, detail))

    def raise_if_failed(self):
        if not self.ok:
            raise InvalidStrategyError(self)

    def __str__(self):
        return "\n".join(str(v) for v in self.violations) or "ok"


def party_dims(net: Network, states: list[SourceState], party) -> tuple[int, ...]:
    """Local dimensions of the wires a party receives, in its wire order."""
    by_id = {s.source: s for s in states}
    dims = []
    for sid in net.party_sources(party):
        st = by_id[sid]
        dims.append(st.dims[net.source_parties(sid).index(party)])
    return tuple(dims)


def validate_strategy(net: Network, states: list[SourceState], bases: list[MeasurementBasis]) -> ValidationReport:
    """Check a strategy against its invariants.

    Everything found wrong is reported (normalization, orthonormality,
    completeness, token-sum support, duplicate labels, structural
    mismatches); nothing is silently corrected.
    """
    report = ValidationReport()
    state_ids = {s.source for s in states}
    if state_ids != set(net.source_ids):
        report.add("structure", "sources", f"state ids {sorted(state_ids)} do not match network sources")
        return report
    basis_ids = {b.party for b in bases}
    if basis_ids != set(net.parties):
        report.add("structure", "parties", f"basis ids {sorted(basis_ids)} do not match network parties")
        return report

    for st in states:
        where = f"source {st.source}"
        wires = net.source_parties(st.source)
        if len(st.dims) != len(wires):
            report.add("structure", where, f"{len(st.dims)} dims for {len(wires)} wires")
            continue
        if any(d < 1 for d in st.dims):
            report.add("structure", where, "nonpositive wire dimension")
            continue
        if not st.amplitudes:
            report.add("normalization", where, "empty amplitude map")
            continue
        bad_tuple = False
        for t in st.support():
            if len(t) != len(st.dims) or any(not (0 <= x < d) for x, d in zip(t, st.dims)):
                report.add("structure", where, f"support tuple {t!r} outside the local alphabet")
                bad_tuple = True
        if bad_tuple:
            continue
        norm = sum(abs(a) ** 2 for a in st.amplitudes.values())
        if abs(norm - 1.0) > NORM_TOL:
            report.add("normalization", where, f"squared amplitudes sum to {norm!r}")
        if st.eta is not None:
            for t, a in st.amplitudes.items():
                if abs(a) > 0 and sum(t) != st.eta:
                    report.add("token-sum", where, f"support tuple {t!r} does not sum to eta={st.eta}")

    for basis in bases:
        where = f"party {basis.party}"
        dims = party_dims(net, states, basis.party)
        dim = math.prod(dims)
        if len(basis.vectors) != dim:
            report.add("completeness", where, f"{len(basis.vectors)} vectors for dimension {dim}")
        labels = [v.label for v in basis.vectors]
        if len(set(labels)) != len(labels):
            report.add("labels", where, "duplicate outcome labels")
        ok_tuples = True
        for v in basis.vectors:
            for t in v.amplitudes:
                if len(t) != len(dims) or any(not (0 <= x < d) for x, d in zip(t, dims)):
                    report.add("structure", where, f"vector tuple {t!r} outside the party space")
                    ok_tuples = False
        if not ok_tuples:
            continue
        mat = np.zeros((len(basis.vectors), dim), dtype=complex)
        strides = np.cumprod((1,) + dims[::-1][:-1])[::-1]
        for r, v in enumerate(basis.vectors):
            for t, a in v.amplitudes.items():
                mat[r, int(np.dot(t, strides))] = a
        gram = mat @ mat.conj().T
        err = np.max(np.abs(gram - np.eye(len(basis.vectors))))
        if err > ORTHO_TOL:
            r, c = np.unravel_index(np.argmax(np.abs(gram - np.eye(len(basis.vectors)))), gram.shape)
            report.add(
                "orthonormality",
                where,
                f"gram deviation {err:.3e} at vectors {label_sort_key(labels[r])} / {label_sort_key(labels[c])}",
            )
    return report


# -- joint distribution ------------------------------------------------------


def _global_dimension(net: Network, states: list[SourceState]) -> int:
    dim = 1
    for st in states:
        dim *= math.prod(st.dims)
    return dim


def _support_size(states: list[SourceState]) -> int:
    size = 1
    for st in states:
        size *= len(st.amplitudes)
    return size


def _dense_joint(net: Network, states: list[SourceState], bases: list[MeasurementBasis]):
    """Contract the dense global state against all party bases at once."""
    by_id = {s.source: s for s in states}
    bases_by_id = {b.party: b for b in bases}
    wires = net.wires()

    # Product state, one tensor axis per wire (wires grouped by source).
    state = np.array(1.0, dtype=complex)
    for sid in net.source_ids:
        st = by_id[sid]
        local = np.zeros(st.dims, dtype=complex)
        for t, a in st.amplitudes.items():
            local[t] = a
        state = np.multiply.outer(state, local)

    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if len(wires) + len(net.parties) > len(letters):
        raise DimensionError("too many tensor axes for the dense contraction")
    wire_letter = {w: letters[k] for k, w in enumerate(wires)}
    out_letters = letters[len(wires):len(wires) + len(net.parties)]

    operands = [state]
    subs = ["".join(wire_letter[w] for w in wires)]
    for party, out in zip(net.parties, out_letters):
        basis = bases_by_id[party]
        dims = party_dims(net, states, party)
        tensor = np.zeros((len(basis.vectors),) + dims, dtype=complex)
        for r, v in enumerate(basis.vectors):
            for t, a in v.amplitudes.items():
                tensor[(r,) + t] = np.conj(a)
        operands.append(tensor)
        subs.append(out + "".join(wire_letter[(sid, party)] for sid in net.party_sources(party)))
    expr = ",".join(subs) + "->" + out_letters
    amp = np.einsum(expr, *operands, optimize="greedy")
    probs = np.abs(amp) ** 2

    label_lists = [[v.label for v in bases_by_id[p].vectors] for p in net.parties]
    atoms = {}
    for idx in np.argwhere(probs > 0):
        key = tuple(label_lists[k][i] for k, i in enumerate(idx))
        atoms[key] = float(probs[tuple(idx)])
    return atoms


def _sparse_amplitudes(net: Network, states: list[SourceState], bases: list[MeasurementBasis],
                       event=None, pattern_cap=DEFAULT_PATTERN_CAP):
    """Sum Born amplitudes over the computational support of the product state.

    Exact whenever it runs: it expands the same contraction as the dense
    path, pattern by pattern.  ``event`` optionally restricts the admissible
    labels per party.
    """
    by_id = {s.source: s for s in states}
    bases_by_id = {b.party: b for b in bases}
    if _support_size(states) > pattern_cap:
        raise DimensionError(f"source support product exceeds cap {pattern_cap}")

    # Per party: delivered tuple -> [(label, conj(component))].
    candidates = {}
    for party in net.parties:
        table = {}
        for v in bases_by_id[party].vectors:
            if event is not None and not event(v.label):
                continue
            for t, a in v.amplitudes.items():
                if a != 0:
                    table.setdefault(t, []).append((v.label, np.conj(complex(a))))
        candidates[party] = table

    supports = [list(by_id[sid].amplitudes.items()) for sid in net.source_ids]
    amps: dict[tuple, complex] = {}
    for combo in itertools.product(*supports):
        amp = complex(1.0)
        sent = {}
        for sid, (t, a) in zip(net.source_ids, combo):
            amp *= complex(a)
            for p, sym in zip(net.source_parties(sid), t):
                sent[(sid, p)] = sym
        if amp == 0:
            continue
        options = []
        dead = False
        for party in net.parties:
            delivered = tuple(sent[(sid, party)] for sid in net.party_sources(party))
            opts = candidates[party].get(delivered)
            if not opts:
                dead = True
                break
            options.append(opts)
        if dead:
            continue
        for labelled in itertools.product(*options):
            contrib = amp
            for _, comp in labelled:
                contrib *= comp
            key = tuple(lbl for lbl, _ in labelled)
            amps[key] = amps.get(key, complex(0.0)) + contrib
    return {k: float(abs(v) ** 2) for k, v in amps.items() if abs(v) > 0}


def joint_distribution(
    net: Network,
    states: list[SourceState],
    bases: list[MeasurementBasis],
    *,
    method: str = "auto",
    amplitude_cap: int = DEFAULT_AMPLITUDE_CAP,
    pattern_cap: int = DEFAULT_PATTERN_CAP,
    assume_valid: bool = False,
) -> JointDistribution:
    """Joint output distribution of a quantum strategy (Born rule, exact).

    ``method`` is ``"dense"``, ``"sparse"`` or ``"auto"``.  The dense path
    allocates the full product space and refuses above ``amplitude_cap``
    global amplitudes; the sparse path sums over the support of the product
    state instead and refuses above ``pattern_cap`` support patterns.
    """
    if not assume_valid:
        validate_strategy(net, states, bases).raise_if_failed()
    dim = _global_dimension(net, states)
    if method == "auto":
        method = "dense" if dim <= amplitude_cap else "sparse"
    if method == "dense":
        if dim > amplitude_cap:
            raise DimensionError(f"global dimension {dim} exceeds cap {amplitude_cap}")
        atoms = _dense_joint(net, states, bases)
    elif method == "sparse":
        atoms = _sparse_amplitudes(net, states, bases, pattern_cap=pattern_cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    return JointDistribution(net.parties, atoms)


def event_distribution(
    net: Network,
    states: list[SourceState],
    bases: list[MeasurementBasis],
    event,
    *,
    pattern_cap: int = DEFAULT_PATTERN_CAP,
    assume_valid: bool = False,
):
    """Probabilities of the output tuples whose labels all satisfy ``event``.

    Returns ``(atoms, probability)`` where the atoms are unnormalized.
    """
    if not assume_valid:
        validate_strategy(net, states, bases).raise_if_failed()
    atoms = _sparse_amplitudes(net, states, bases, event=event, pattern_cap=pattern_cap)
    return atoms, sum(atoms.values())


def coarse_grain(dist: JointDistribution, projection) -> JointDistribution:
    """Pushforward of a distribution along a label projection; mass preserved."""
    atoms: dict[tuple, float] = {}
    for outputs, p in dist.atoms.items():
        key = tuple(projection(a) for a in outputs)
        atoms[key] = atoms.get(key, 0.0) + p
    return JointDistribution(dist.parties, atoms, validate=False)


def decohere(net: Network, states: list[SourceState], bases: list[MeasurementBasis]) -> ClassicalStrategy:
    """The decohered classical strategy of a quantum one.

    Sources are measured in the computational basis before distribution
    (pmf = squared amplitudes); each party's response becomes the
    conditional pmf of her labels given the computational tuple she
    receives.
    """
    validate_strategy(net, states, bases).raise_if_failed()
    by_id = {s.source: s for s in states}
    bases_by_id = {b.party: b for b in bases}

    sources = []
    for sid in net.source_ids:
        st = by_id[sid]
        values = {t: float(abs(a) ** 2) for t, a in st.amplitudes.items() if abs(a) > 0}
        sources.append(SourcePmf(sid, values))

    responses = []
    for party in net.parties:
        dims = party_dims(net, states, party)
        basis = bases_by_id[party]
        # Which component of each source value this party receives.
        positions = [net.source_parties(sid).index(party) for sid in net.party_sources(party)]
        table = {}
        for received in itertools.product(*[by_id[sid].support() for sid in net.party_sources(party)]):
            comps = tuple(val[pos] for val, pos in zip(received, positions))
            pmf = {}
            for v in basis.vectors:
                a = v.amplitudes.get(comps, 0)
                if abs(a) > 0:
                    pmf[v.label] = float(abs(a) ** 2)
            if pmf:
                table[received] = pmf
        responses.append(ResponseMap(party, table))
    return ClassicalStrategy(sources, responses)


# -- strategy container and serialization ------------------------------------


@dataclass
class Strategy:
    """A quantum strategy bundled with its network and bookkeeping tags."""

    network: Network
    states: list[SourceState]
    bases: list[MeasurementBasis]
    kind: str  # "tc" or "cm"
    family: str | None = None
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "format": "qnetcert-strategy",
            "kind": self.kind,
            "family": self.family,
            "params": self.params,
            "network": json.loads(self.network.to_json()),
            "sources": [s.to_json() for s in self.states],
            "parties": [b.to_json() for b in self.bases],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Strategy":
        doc = json.loads(text)
        net = Network.from_json(json.dumps(doc["network"]), allow_redundant=True)
        return cls(
            network=net,
            states=[SourceState.from_json(s) for s in doc["sources"]],
            bases=[MeasurementBasis.from_json(b) for b in doc["parties"]],
            kind=doc["kind"],
            family=doc.get("family"),
            params=doc.get("params", {}),
        )
