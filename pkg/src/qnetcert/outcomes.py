"""Outcome labels and joint output distributions.

Labels are small frozen values shared by the quantum and classical layers:

* ``TokenCount(n, alpha)`` - a token count, optionally refined by the index
  of a superposed provenance row.
* ``ColorMatch(c)`` - all received colors matched and equal ``c``.
* ``RevealedTuple(symbols)`` - a computational-basis outcome that exposes
  exactly what each incident source sent.
* ``Ambiguous(index)`` - a superposed row that reveals neither provenance
  nor a match.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

MASS_TOL = 1e-12
# Probability atoms below this are treated as exact zeros and dropped.
ATOM_FLOOR = 1e-14


@dataclass(frozen=True)
class TokenCount:
    n: int
    alpha: int | None = None


@dataclass(frozen=True)
class ColorMatch:
    color: int


@dataclass(frozen=True)
class RevealedTuple:
    symbols: tuple[int, ...]


@dataclass(frozen=True)
class Ambiguous:
    index: int


Label = TokenCount | ColorMatch | RevealedTuple | Ambiguous


def is_ambiguous_output(label: Label) -> bool:
    """The conditioning predicate for the hidden-variable distribution.

    Token strategies mark their superposed rows with a refinement index;
    color strategies mark them explicitly.
    """
    if isinstance(label, Ambiguous):
        return True
    return isinstance(label, TokenCount) and label.alpha is not None


def label_to_json(label: Label) -> dict:
    if isinstance(label, TokenCount):
        doc = {"kind": "token", "n": label.n}
        if label.alpha is not None:
            doc["alpha"] = label.alpha
        return doc
    if isinstance(label, ColorMatch):
        return {"kind": "match", "c": label.color}
    if isinstance(label, RevealedTuple):
        return {"kind": "revealed", "symbols": list(label.symbols)}
    if isinstance(label, Ambiguous):
        return {"kind": "ambiguous", "index": label.index}
    raise TypeError(f"not an outcome label: {label!r}")


def label_from_json(doc: dict) -> Label:
    kind = doc.get("kind")
    if kind == "token":
        return TokenCount(doc["n"], doc.get("alpha"))
    if kind == "match":
        return ColorMatch(doc["c"])
    if kind == "revealed":
        return RevealedTuple(tuple(doc["symbols"]))
    if kind == "ambiguous":
        return Ambiguous(doc["index"])
    raise ValueError(f"unknown label kind: {kind!r}")


def label_sort_key(label: Label) -> str:
    return json.dumps(label_to_json(label), sort_keys=True)


def outputs_sort_key(outputs: tuple) -> tuple:
    return tuple(label_sort_key(a) for a in outputs)


def token_marginal(label: Label) -> Label:
    """Project any token-strategy label onto its bare token count."""
    if isinstance(label, TokenCount):
        return TokenCount(label.n)
    if isinstance(label, RevealedTuple):
        return TokenCount(sum(label.symbols))
    raise ValueError(f"not a token-strategy label: {label!r}")


def color_marginal(label: Label) -> Label:
    """Collapse all superposed rows onto the single ambiguous output."""
    if isinstance(label, Ambiguous):
        return Ambiguous(0)
    if isinstance(label, (ColorMatch, RevealedTuple)):
        return label
    raise ValueError(f"not a color-strategy label: {label!r}")


class JointDistribution:
    """Joint distribution of output labels, one coordinate per party."""

    def __init__(self, parties, atoms, *, validate=True):
        self.parties = tuple(parties)
        # Drop zero atoms (up to round-off) but keep genuine negatives so
        # validation can reject them.
        self.atoms = {
            outputs: float(p) for outputs, p in atoms.items() if abs(float(p)) > ATOM_FLOOR
        }
        if validate:
            for outputs, p in self.atoms.items():
                if len(outputs) != len(self.parties):
                    raise ValueError(f"atom arity mismatch at {outputs!r}")
                if p < 0:
                    raise ValueError(f"negative probability at {outputs!r}")
            mass = sum(self.atoms.values())
            if abs(mass - 1.0) > MASS_TOL:
                raise ValueError(f"total mass {mass!r} is not 1")

    def p(self, outputs: tuple) -> float:
        return self.atoms.get(tuple(outputs), 0.0)

    @property
    def mass(self) -> float:
        return sum(self.atoms.values())

    def event_mass(self, predicate) -> float:
        """Total probability of atoms whose every coordinate satisfies `predicate`."""
        return sum(p for o, p in self.atoms.items() if all(predicate(a) for a in o))

    def party_index(self, party) -> int:
        return self.parties.index(party)

    def support(self):
        return self.atoms.keys()

    def allclose(self, other: "JointDistribution", tol: float = 1e-10) -> bool:
        if self.parties != other.parties:
            return False
        keys = set(self.atoms) | set(other.atoms)
        return all(abs(self.p(k) - other.p(k)) <= tol for k in keys)

    def to_json(self) -> str:
        rows = [
            {"outputs": [label_to_json(a) for a in outputs], "p": p}
            for outputs, p in sorted(self.atoms.items(), key=lambda kv: outputs_sort_key(kv[0]))
        ]
        return json.dumps({"parties": list(self.parties), "atoms": rows},
                          sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution":
        doc = json.loads(text)
        atoms = {
            tuple(label_from_json(a) for a in row["outputs"]): row["p"]
            for row in doc["atoms"]
        }
        return cls(doc["parties"], atoms)
