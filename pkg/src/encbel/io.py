"""JSON network and evidence documents.

A network document::

    {"format_version": 1,
     "variables": [{"name": "X", "frame": ["+", "-"]}, ...],
     "edges": [{"parent": "A", "child": "X",
                "table": {"a1": [{"focal": ["+"], "mass": 0.9},
                                 {"focal": ["+", "-"], "mass": 0.1}], ...}}],
     "priors": [{"variable": "A", "masses": [{"focal": [...], "mass": ...}]}],
     "evidence": [...same shape as priors...]}

A focal set is the list of child labels it contains.  Evidence may also live
in a separate document holding only ``format_version`` and ``evidence``.
Anything structurally wrong is rejected with the JSON path of the offending
field; nothing is silently repaired.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .conditional import ConditionalBeliefFamily
from .errors import EncError
from .frame import Scope, iter_bits
from .massfn import MassFunction
from .network.model import EvidentialNetwork

FORMAT_VERSION = 1
COLUMN_TOL = 1e-6
SAVE_DIGITS = 12


class DocumentError(EncError, ValueError):
    """Malformed network or evidence document."""


def _fail(where: str, msg: str):
    raise DocumentError(f"{where}: {msg}")


def _expect(obj, kind, where):
    if not isinstance(obj, kind):
        _fail(where, f"expected {kind.__name__ if isinstance(kind, type) else 'value'}, got {type(obj).__name__}")
    return obj


def _parse_text(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}") from None


def _check_version(doc, where):
    _expect(doc, dict, where)
    if doc.get("format_version") != FORMAT_VERSION:
        _fail(f"{where}.format_version", f"unsupported value {doc.get('format_version')!r}")


def _masses(scope: Scope, rows, where: str) -> MassFunction:
    _expect(rows, list, where)
    if not rows:
        _fail(where, "no focal sets")
    var = scope.variables[0]
    acc: dict[int, float] = {}
    for j, row in enumerate(rows):
        at = f"{where}[{j}]"
        _expect(row, dict, at)
        if set(row) != {"focal", "mass"}:
            _fail(at, "expected exactly the keys 'focal' and 'mass'")
        labels = _expect(row["focal"], list, f"{at}.focal")
        mask = 0
        for lab in labels:
            if not isinstance(lab, str) or lab not in var.frame:
                _fail(f"{at}.focal", f"unknown label {lab!r} for {var.name}")
            bit = 1 << var.index(lab)
            if mask & bit:
                _fail(f"{at}.focal", f"label {lab!r} repeated")
            mask |= bit
        v = row["mass"]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
            _fail(f"{at}.mass", f"invalid mass {v!r}")
        if mask in acc:
            _fail(f"{at}.focal", "focal set listed twice")
        acc[mask] = float(v)
    total = math.fsum(acc.values())
    if abs(total - 1.0) > COLUMN_TOL:
        _fail(where, f"masses sum to {total:.9g}, expected 1")
    return MassFunction(scope, acc)


def _belief_blocks(net, blocks, where, add):
    _expect(blocks, list, where)
    for i, blk in enumerate(blocks):
        at = f"{where}[{i}]"
        _expect(blk, dict, at)
        name = blk.get("variable")
        if name not in net.variables:
            _fail(f"{at}.variable", f"unknown variable {name!r}")
        add(name, _masses(net.scope(name), blk.get("masses"), f"{at}.masses"))


def network_from_dict(doc, source: str = "document") -> EvidentialNetwork:
    _check_version(doc, source)
    net = EvidentialNetwork()
    variables = _expect(doc.get("variables"), list, f"{source}.variables")
    for i, v in enumerate(variables):
        at = f"{source}.variables[{i}]"
        _expect(v, dict, at)
        name, frame = v.get("name"), v.get("frame")
        if not isinstance(name, str) or not name:
            _fail(f"{at}.name", "missing variable name")
        if name in net.variables:
            _fail(f"{at}.name", f"variable {name!r} declared twice")
        _expect(frame, list, f"{at}.frame")
        if not frame or not all(isinstance(x, str) for x in frame) or len(set(frame)) != len(frame):
            _fail(f"{at}.frame", "frame must be a nonempty list of distinct labels")
        net.add_variable(name, frame)
    for i, e in enumerate(_expect(doc.get("edges", []), list, f"{source}.edges")):
        at = f"{source}.edges[{i}]"
        _expect(e, dict, at)
        p, c = e.get("parent"), e.get("child")
        for key, name in (("parent", p), ("child", c)):
            if name not in net.variables:
                _fail(f"{at}.{key}", f"unknown variable {name!r}")
        if p == c:
            _fail(at, f"self-loop on {p}")
        if (p, c) in net.families:
            _fail(at, f"edge {p}->{c} declared twice")
        table = _expect(e.get("table"), dict, f"{at}.table")
        pv = net.variables[p]
        unknown = set(table) - set(pv.frame)
        if unknown:
            _fail(f"{at}.table", f"unknown parent label(s) {sorted(unknown)} for {p}")
        missing = [lab for lab in pv.frame if lab not in table]
        if missing:
            _fail(f"{at}.table", f"no column for parent label(s) {missing}")
        child = net.scope(c)
        entries = tuple(_masses(child, table[lab], f"{at}.table.{lab}") for lab in pv.frame)
        net.add_edge(p, c, ConditionalBeliefFamily(net.scope(p), child, entries))
    _belief_blocks(net, doc.get("priors", []), f"{source}.priors", _set_prior_once(net, source))
    _belief_blocks(net, doc.get("evidence", []), f"{source}.evidence", net.add_evidence)
    return net


def _set_prior_once(net, source):
    def add(name, m):
        if name in net.priors:
            _fail(f"{source}.priors", f"two priors for {name}")
        net.set_prior(name, m)
    return add


def attach_evidence(net: EvidentialNetwork, doc, source: str = "evidence") -> EvidentialNetwork:
    """Copy of ``net`` with the evidence blocks of ``doc`` added."""
    _check_version(doc, source)
    extra = set(doc) - {"format_version", "evidence"}
    if extra:
        _fail(source, f"unexpected key(s) {sorted(extra)}")
    out = net.copy()
    _belief_blocks(out, doc.get("evidence", []), f"{source}.evidence", out.add_evidence)
    return out


def load_network(path, evidence=None) -> EvidentialNetwork:
    path = Path(path)
    net = network_from_dict(_parse_text(path.read_text(encoding="utf-8"), str(path)), path.name)
    if evidence is not None:
        ev = Path(evidence)
        net = attach_evidence(net, _parse_text(ev.read_text(encoding="utf-8"), str(ev)), ev.name)
    return net


def load_evidence(net: EvidentialNetwork, path) -> EvidentialNetwork:
    path = Path(path)
    return attach_evidence(net, _parse_text(path.read_text(encoding="utf-8"), str(path)), path.name)


# -- writing -------------------------------------------------------------------

def _saved_masses(m: MassFunction) -> list[tuple[int, float]]:
    """Masses rounded for readability, with the largest one set to one minus
    the others so the column sums to exactly 1.0 and reloads unchanged."""
    items = [(k, float(f"{v:.{SAVE_DIGITS}g}")) for k, v in m.items()]
    top = max(range(len(items)), key=lambda i: (items[i][1], items[i][0]))
    rest = math.fsum(v for i, (_, v) in enumerate(items) if i != top)
    items[top] = (items[top][0], 1.0 - rest)
    return items


def _rows(m: MassFunction) -> list[dict]:
    var = m.scope.variables[0]
    return [{"focal": [var.frame[i] for i in iter_bits(k)], "mass": v} for k, v in _saved_masses(m)]


def _blocks(pairs) -> list[dict]:
    return [{"variable": name, "masses": _rows(m)} for name, m in pairs]


def network_to_dict(net: EvidentialNetwork) -> dict:
    order = {n: v.order for n, v in net.variables.items()}
    edges = []
    for (p, c) in sorted(net.families, key=lambda e: (order[e[0]], order[e[1]])):
        f = net.families[(p, c)]
        frame = net.variables[p].frame
        edges.append({"parent": p, "child": c,
                      "table": {frame[i]: _rows(e) for i, e in enumerate(f.entries)}})
    names = sorted(net.variables, key=order.__getitem__)
    return {
        "format_version": FORMAT_VERSION,
        "variables": [{"name": n, "frame": list(net.variables[n].frame)} for n in names],
        "edges": edges,
        "priors": _blocks((n, net.priors[n]) for n in names if n in net.priors),
        "evidence": _blocks((n, m) for n in names for m in net.evidence.get(n, [])),
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def save_network(net: EvidentialNetwork, path) -> None:
    Path(path).write_text(dumps(network_to_dict(net)), encoding="utf-8")


def evidence_to_dict(pairs) -> dict:
    """``pairs`` is an iterable of (variable name, MassFunction)."""
    return {"format_version": FORMAT_VERSION, "evidence": _blocks(pairs)}
