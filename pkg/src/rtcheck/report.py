"""Report documents for verdicts: JSON-ready dicts and plain text."""
from __future__ import annotations

import json

from .consistency import WITNESS, Session, Verdict
from .logic import RequirementSet, as_letter


def replay(rs: RequirementSet, trace, session: Session | None = None) -> list[list[dict]]:
    """Per-step, per-requirement configuration annotations of ``trace`` on the full set."""
    s = session or Session(rs)
    trace = [as_letter(x) for x in trace]
    runs = [s.local(i).run(trace) for i in range(len(rs))]
    err = [s.error_mask(i) for i in range(len(rs))]
    out = []
    for step in range(len(trace) + 1):
        row = []
        for i, r in enumerate(rs):
            lg = s.local(i)
            cfg = lg.configuration(runs[i][step])
            ann = {
                "requirement": r.name,
                "state": str(cfg.state),
                "clocks": dict(cfg.valuation),
                "error": bool(err[i][runs[i][step]]),
            }
            phase = r.automaton.phase_of(cfg.state)
            if phase is not None:
                ann["phase"] = phase
            row.append(ann)
        out.append(row)
    return out


def build_report(
    rs: RequirementSet,
    verdict: Verdict,
    session: Session | None = None,
    timing: bool = False,
) -> dict:
    doc = {
        "verdict": verdict.kind,
        "method": verdict.method,
        "bounds": dict(verdict.bounds),
        "requirements": list(rs.names),
        "involved": list(verdict.involved),
        "confirmed_against_full_set": verdict.confirmed,
        "witness": None,
    }
    if verdict.kind == WITNESS:
        w = verdict.witness
        s = session or Session(rs)
        rows = replay(rs, w.trace, s)
        steps = []
        for k, row in enumerate(rows):
            letter = None if k == 0 else {p: p in w.trace[k - 1] for p in rs.props}
            steps.append({"step": k, "letter": letter, "requirements": row})
        doc["witness"] = {
            "length": len(w.trace),
            "target": w.target_kind,
            "inevitably_fails": s.ifails(w.trace),
            "steps": steps,
        }
    stats = {k: v for k, v in verdict.stats.items() if k != "seconds"}
    doc["stats"] = stats
    if timing:
        doc["timing"] = {"seconds": verdict.stats.get("seconds")}
    return doc


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False)


def _fmt_req(ann: dict) -> str:
    label = ann.get("phase", ann["state"])
    clocks = " ".join(f"{c}={v}" for c, v in ann["clocks"].items())
    return f"{ann['requirement']}:{label}" + (f"({clocks})" if clocks else "")


def to_text(doc: dict) -> str:
    b = ", ".join(f"{k}={v}" for k, v in doc["bounds"].items())
    lines = [f"verdict: {doc['verdict']}  (method {doc['method']}; {b})"]
    if doc["verdict"] == "Consistent":
        lines.append("no trace makes failure inevitable without failing first")
    elif doc["witness"] is None:
        lines.append("no inconsistency found within the given bounds")
    else:
        w = doc["witness"]
        lines.append(f"involved: {', '.join(doc['involved'])}")
        lines.append(f"witness ({w['length']} steps, no requirement violated yet):")
        width = max(
            [len(_letter_text(s["letter"])) for s in w["steps"]] + [6]
        )
        for s in w["steps"]:
            reqs = "  ".join(_fmt_req(a) for a in s["requirements"])
            lines.append(f"  {s['step']:>3}  {_letter_text(s['letter']):<{width}}  {reqs}")
        if w["inevitably_fails"]:
            lines.append("every continuation of this trace violates some requirement")
    if "timing" in doc:
        lines.append(f"time: {doc['timing']['seconds']:.3f}s")
    return "\n".join(lines)


def _letter_text(letter) -> str:
    if letter is None:
        return "(start)"
    true = [p for p, v in letter.items() if v]
    return "{" + ", ".join(true) + "}"
