"""Reader for requirement files.

Example::

    props request, response, repair;

    # request answered within 3 to 4 steps
    sup R1 = request -> [3,4] response;
    sup R3 = repair -> !request [5,5];

    sup R2 {
      tse: repair; t: [0,0];
      l: [5,5];
      ase: !response; a: [3,3];
    }

    automaton Watch {
      states idle, busy, bad;
      initial idle;
      accepting idle, busy;
      clocks x;
      idle -> busy when request reset x;
      busy -> busy when !response guard x < 4;
      busy -> idle when response guard x <= 4;
      busy -> bad when !response guard x >= 4;
    }

In a ``sup`` block, omitted ``tc``/``tee`` default to ``tse``, omitted
``ac``/``aee`` default to ``ase`` and omitted windows to ``[0,0]``.  The
shorthand ``p -> [l,u] q [a,b]`` is the point trigger ``p`` with delay
``[l,u]`` and ``q`` held over ``[a,b]``; both windows may be omitted.
Explicit automata are completed (see :func:`rtcheck.logic.complete`) and
must be deterministic.
"""
from __future__ import annotations

from pathlib import Path

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from .logic import (
    FALSE,
    TRUE,
    ClockAtom,
    ClockGuard,
    Requirement,
    RequirementSet,
    StructuralError,
    TimedAutomaton,
    Transition,
    Var,
    complete,
    conj,
    disj,
    neg,
    validate_complete,
    validate_deterministic,
)
from .sup import SupRequirement, compile_sup

GRAMMAR = r"""
start: item*

?item: props_decl | sup_block | sup_short | automaton

props_decl: "props" name_list ";"

sup_block: "sup" NAME "{" sup_field* "}"
sup_field: NAME ":" (window | expr) ";"
sup_short: "sup" NAME "=" expr "->" window? expr window? ";"
window: "[" INT "," INT "]"

automaton: "automaton" NAME "{" aut_item* "}"
?aut_item: states | initial | accepting | clocks | transition
states: "states" name_list ";"
initial: "initial" name_list ";"
accepting: "accepting" name_list? ";"
clocks: "clocks" name_list? ";"
transition: NAME "->" NAME when? guard? reset? ";"
when: "when" expr
guard: "guard" clock_atom ("&" clock_atom)*
reset: "reset" name_list
clock_atom: NAME CMP INT

name_list: NAME ("," NAME)*

?expr: or_expr
?or_expr: and_expr ("|" and_expr)*
?and_expr: not_expr ("&" not_expr)*
?not_expr: "!" not_expr -> negation
         | primary
?primary: "true" -> true
        | "false" -> false
        | NAME -> var
        | "(" expr ")"

CMP: "<=" | ">=" | "==" | "<" | ">" | "="
NAME: /[A-Za-z_][A-Za-z0-9_.]*/
COMMENT: /#[^\n]*/ | /\/\/[^\n]*/

%import common.INT
%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=False)

SUP_EXPRS = ("tse", "tc", "tee", "ase", "ac", "aee")
SUP_WINDOWS = {"t": ("tmin", "tmax"), "l": ("lmin", "lmax"), "a": ("amin", "amax")}


class RequirementFileError(Exception):
    """Syntax or validation error; ``problems`` lists every finding."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, problems=()):
        self.line = line
        self.column = column
        self.problems = list(problems)
        where = f"line {line}, column {column}: " if line is not None else ""
        text = where + message
        if self.problems:
            text += "\n" + "\n".join(f"  - {p}" for p in self.problems)
        super().__init__(text)


def _err(tok, message):
    return RequirementFileError(message, getattr(tok, "line", None), getattr(tok, "column", None))


@v_args(inline=True)
class _Build(Transformer):
    def __init__(self):
        super().__init__()
        self.props: list[str] = []
        self.uses: list[Token] = []

    # expressions
    def var(self, tok):
        self.uses.append(tok)
        return Var(str(tok))

    def true(self):
        return TRUE

    def false(self):
        return FALSE

    def negation(self, e):
        return neg(e)

    def and_expr(self, *es):
        return conj(*es)

    def or_expr(self, *es):
        return disj(*es)

    def name_list(self, *toks):
        return list(toks)

    def window(self, lo, hi):
        return (int(lo), int(hi))

    # declarations
    def props_decl(self, names):
        for tok in names:
            if str(tok) in self.props:
                raise _err(tok, f"proposition {tok} declared twice")
            self.props.append(str(tok))
        return None

    def sup_field(self, name, value):
        return name, value

    def sup_block(self, name, *fields):
        kw: dict = {}
        seen = set()
        for tok, value in fields:
            key = str(tok)
            if key in seen:
                raise _err(tok, f"field {key} given twice in {name}")
            seen.add(key)
            if key in SUP_EXPRS:
                if isinstance(value, tuple):
                    raise _err(tok, f"field {key} expects an expression")
                kw[key] = value
            elif key in SUP_WINDOWS:
                if not isinstance(value, tuple):
                    raise _err(tok, f"field {key} expects a window [min, max]")
                lo, hi = SUP_WINDOWS[key]
                kw[lo], kw[hi] = value
            else:
                raise _err(tok, f"unknown field {key} (expected one of {', '.join(SUP_EXPRS + tuple(SUP_WINDOWS))})")
        for key in ("tse", "ase"):
            if key not in kw:
                raise _err(name, f"sup {name} lacks {key}")
        kw.setdefault("tc", kw["tse"])
        kw.setdefault("tee", kw["tse"])
        kw.setdefault("ac", kw["ase"])
        kw.setdefault("aee", kw["ase"])
        return self._sup(name, kw)

    def sup_short(self, name, *parts):
        parts = list(parts)
        p = parts.pop(0)
        delay = parts.pop(0) if isinstance(parts[0], tuple) else (0, 0)
        q = parts.pop(0)
        duration = parts.pop(0) if parts else (0, 0)
        return self._sup(name, dict(tse=p, tc=p, tee=p, ase=q, ac=q, aee=q,
                                    lmin=delay[0], lmax=delay[1], amin=duration[0], amax=duration[1]))

    def _sup(self, name, kw):
        try:
            r = SupRequirement(**kw)
        except StructuralError as e:
            raise _err(name, f"sup {name}: {e}") from None
        return ("sup", name, r)

    # automata
    def states(self, names):
        return ("states", names)

    def initial(self, names):
        return ("initial", names)

    def accepting(self, names=()):
        return ("accepting", list(names))

    def clocks(self, names=()):
        return ("clocks", list(names))

    def when(self, e):
        return ("when", e)

    def clock_atom(self, clock, op, bound):
        return ClockAtom(str(clock), str(op), int(bound))

    def guard(self, *atoms):
        return ("guard", ClockGuard(tuple(atoms)))

    def reset(self, names):
        return ("reset", frozenset(str(n) for n in names))

    def transition(self, src, tgt, *opts):
        d = dict(opts)
        return ("transition", src, Transition(str(src), d.get("when", TRUE), d.get("guard", ClockGuard()),
                                              d.get("reset", frozenset()), str(tgt)))

    def automaton(self, name, *items):
        fields: dict = {}
        transitions = []
        for item in items:
            if item[0] == "transition":
                transitions.append(item[2])
                continue
            if item[0] in fields:
                raise _err(name, f"automaton {name}: {item[0]} declared twice")
            fields[item[0]] = [str(t) for t in item[1]]
        if "states" not in fields:
            raise _err(name, f"automaton {name} lacks a states declaration")
        if "initial" not in fields:
            raise _err(name, f"automaton {name} lacks an initial declaration")
        used: set[str] = set()
        for t in transitions:
            used |= t.guard.props()
        try:
            ta = TimedAutomaton(
                name=str(name),
                states=tuple(fields["states"]),
                initial=tuple(fields["initial"]),
                props=tuple(sorted(used)),
                clocks=tuple(fields.get("clocks", ())),
                transitions=tuple(transitions),
                accepting=frozenset(fields.get("accepting", fields["states"])),
            )
        except StructuralError as e:
            raise _err(name, str(e)) from None
        return ("automaton", name, ta)

    def start(self, *items):
        return [i for i in items if i is not None]


def parse_text(text: str, completion: str = "to-trap") -> RequirementSet:
    """Parse requirement-file text into a validated :class:`RequirementSet`."""
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as e:
        raise RequirementFileError(f"syntax error: {_describe(e)}", e.line, e.column) from None
    build = _Build()
    try:
        items = build.transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, RequirementFileError):
            raise e.orig_exc from None
        raise
    declared = set(build.props)
    for tok in build.uses:
        if str(tok) not in declared:
            raise _err(tok, f"undeclared proposition {tok}")

    reqs = []
    names: dict[str, Token] = {}
    for kind, name, obj in items:
        if str(name) in names:
            raise _err(name, f"duplicate requirement name {name}")
        names[str(name)] = name
        if kind == "sup":
            reqs.append(Requirement(str(name), compile_sup(obj, str(name)), obj))
            continue
        problems = validate_deterministic(obj)
        if problems:
            raise RequirementFileError(f"automaton {name} is not deterministic", name.line, name.column, problems)
        ta = complete(obj, completion)
        problems = validate_complete(ta) + validate_deterministic(ta)
        if problems:  # pragma: no cover - completion guarantees both
            raise RequirementFileError(f"automaton {name} is invalid after completion", name.line, name.column, problems)
        reqs.append(Requirement(str(name), ta))
    try:
        return RequirementSet(tuple(build.props), tuple(reqs))
    except StructuralError as e:
        raise RequirementFileError(str(e)) from None


def parse_requirements(path, completion: str = "to-trap") -> RequirementSet:
    return parse_text(Path(path).read_text(encoding="utf-8"), completion)


def _describe(e: UnexpectedInput) -> str:
    tok = getattr(e, "token", None)
    if tok is not None:
        expected = sorted(getattr(e, "expected", ()) or ())
        shown = f"unexpected {tok!s:.20}" if str(tok) else "unexpected end of input"
        return shown + (f"; expected one of {', '.join(expected[:8])}" if expected else "")
    char = getattr(e, "char", None)
    return f"unexpected character {char!r}" if char else "unexpected input"
