"""Verification reports: text, JSON and LaTeX renderings, all deterministic."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__
from .scalar import Poly

EXACT, MISMATCH, NO_TARGET = "exact", "mismatch", "no-target"


@dataclass
class Item:
    name: str
    computed: Poly | str
    expected: Poly | None = None
    note: str = ""

    @property
    def match(self) -> str:
        if self.expected is None:
            return NO_TARGET
        if isinstance(self.computed, str):
            return MISMATCH
        return EXACT if self.computed == self.expected else MISMATCH


def _text(x) -> str:
    return x if isinstance(x, str) else x.text()


def _latex(x) -> str:
    return "\\text{" + x + "}" if isinstance(x, str) else x.latex()


@dataclass
class Report:
    target: str
    mode: str
    seed: int | None
    items: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, name, computed, expected=None, note="") -> Item:
        it = Item(name, computed, expected, note)
        self.items.append(it)
        return it

    def extend(self, other: Report, prefix: str):
        for it in other.items:
            self.items.append(Item(f"{prefix}/{it.name}", it.computed, it.expected, it.note))
        self.notes += [f"{prefix}: {n}" for n in other.notes]

    @property
    def status(self) -> str:
        return MISMATCH if any(it.match == MISMATCH for it in self.items) else EXACT

    @property
    def exit_code(self) -> int:
        return 0 if self.status == EXACT else 1

    def to_dict(self) -> dict:
        items = []
        for it in self.items:
            d = {
                "name": it.name,
                "computed": {"text": _text(it.computed), "latex": _latex(it.computed)},
                "expected": None if it.expected is None else {"text": it.expected.text(), "latex": it.expected.latex()},
                "match": it.match,
            }
            if it.note:
                d["note"] = it.note
            items.append(d)
        return {
            "version": __version__,
            "target": self.target,
            "mode": self.mode,
            "seed": self.seed,
            "items": items,
            "notes": list(self.notes),
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"target {self.target}  mode {self.mode}  seed {self.seed}  version {__version__}"]
        width = max((len(it.name) for it in self.items), default=4)
        for it in self.items:
            lines.append(f"  [{it.match:>9}] {it.name:<{width}}  {_text(it.computed)}")
            if it.expected is not None and it.match != EXACT:
                lines.append(f"  {'':>11} {'expected':<{width}}  {it.expected.text()}")
            if it.note:
                lines.append(f"  {'':>11} {'':<{width}}  ({it.note})")
        for n in self.notes:
            lines.append(f"  note: {n}")
        lines.append(f"status {self.status}")
        return "\n".join(lines) + "\n"

    def to_latex(self) -> str:
        lines = [
            f"% target {self.target}, mode {self.mode}, seed {self.seed}, version {__version__}",
            "\\begin{tabular}{lll}",
            "item & computed & expected \\\\",
            "\\hline",
        ]
        for it in self.items:
            exp = "--" if it.expected is None else f"${it.expected.latex()}$"
            name = it.name.replace("_", "\\_")
            lines.append(f"\\texttt{{{name}}} & ${_latex(it.computed)}$ & {exp} \\\\")
        lines.append("\\end{tabular}")
        for n in self.notes:
            lines.append(f"% note: {n}")
        lines.append(f"% status {self.status}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return {"text": self.to_text, "json": self.to_json, "latex": self.to_latex}[fmt]()
