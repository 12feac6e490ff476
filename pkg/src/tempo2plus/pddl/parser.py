"""Parser for the supported PDDL 2.1 level-3 / PDDL+ subset.

Lifted formulas and effects are built from the ordinary model classes; a
lifted fluent name is the predicate or function symbol followed by its
arguments, separated by single spaces (``"at ?r ?l"``).  Grounding then
only has to substitute variables inside names.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from ..model import (
    FALSE,
    TRUE,
    Atom,
    BinOp,
    Compare,
    Const,
    Effect,
    FluentRef,
    Formula,
    Neg,
    NumExpr,
    conj,
    disj,
    neg,
    ASSIGN,
    INCREASE,
)
from .sexpr import PDDLSyntaxError, SList, parse_sexpr, position

log = logging.getLogger(__name__)

SUPPORTED_REQUIREMENTS = {
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":equality",
    ":numeric-fluents",
    ":fluents",
    ":durative-actions",
    ":duration-inequalities",
    ":time",
}

UNSUPPORTED_REQUIREMENTS = {
    ":conditional-effects": "conditional-effects",
    ":continuous-effects": "continuous-effects",
    ":timed-initial-literals": "timed-initial-literals",
    ":adl": "adl",
    ":universal-preconditions": "quantified-preconditions",
    ":existential-preconditions": "quantified-preconditions",
    ":quantified-preconditions": "quantified-preconditions",
    ":derived-predicates": "derived-predicates",
    ":preferences": "preferences",
    ":constraints": "constraints",
    ":object-fluents": "object-fluents",
    ":action-costs": "action-costs",
    ":duration-inequalities-non-constant": "non-constant-durations",
}


class UnsupportedFeature(PDDLSyntaxError):
    def __init__(self, feature: str, line=None, col=None):
        super().__init__(f"unsupported feature: {feature}", line, col)
        self.feature = feature


class PDDLTypeError(PDDLSyntaxError):
    pass


def _err(msg, node, cls=PDDLSyntaxError):
    line, col = position(node)
    return cls(msg, line, col)


@dataclass
class Schema:
    """A lifted operator.  ``kind`` is action, durative, process or event."""

    name: str
    kind: str
    params: list[tuple[str, str]]
    pre: Formula = TRUE
    eff: list[Effect] = field(default_factory=list)
    # durative only
    lb: Fraction | None = None
    ub: Fraction | None = None
    start_pre: Formula = TRUE
    end_pre: Formula = TRUE
    overall: Formula = TRUE
    start_eff: list[Effect] = field(default_factory=list)
    end_eff: list[Effect] = field(default_factory=list)
    # process only
    rates: list[tuple[str, NumExpr]] = field(default_factory=list)
    line: int | None = None


@dataclass
class LiftedDomain:
    name: str
    requirements: list[str]
    types: dict[str, str]  # type -> parent
    constants: dict[str, str]  # object -> type
    predicates: dict[str, list[str]]  # name -> argument types
    functions: dict[str, list[str]]
    schemas: list[Schema]

    def is_subtype(self, t: str, ancestor: str) -> bool:
        seen = set()
        while t not in seen:
            if t == ancestor:
                return True
            seen.add(t)
            if t not in self.types:
                return False
            t = self.types[t]
        return False

    @property
    def durative(self) -> list[Schema]:
        return [s for s in self.schemas if s.kind == "durative"]

    def of_kind(self, kind: str) -> list[Schema]:
        return [s for s in self.schemas if s.kind == kind]


@dataclass
class LiftedProblem:
    name: str
    domain: str
    objects: dict[str, str]
    init_true: list[str]
    init_values: dict[str, Fraction]
    goal: Formula


# --------------------------------------------------------------------------


def _typed_list(items, node, default="object") -> list[tuple[str, str]]:
    """``a b - t c`` -> ``[(a, t), (b, t), (c, object)]``."""
    out, pending = [], []
    i = 0
    while i < len(items):
        it = items[i]
        if isinstance(it, list):
            raise _err("unexpected list in typed list", it)
        if it == "-":
            if i + 1 >= len(items) or isinstance(items[i + 1], list):
                if i + 1 < len(items) and items[i + 1] and items[i + 1][0] == "either":
                    raise _err("either-types", items[i + 1], UnsupportedFeature)
                raise _err("missing type after '-'", node)
            out.extend((p, str(items[i + 1])) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(str(it))
        i += 1
    out.extend((p, default) for p in pending)
    return out


def _section(expr, keyword):
    return isinstance(expr, list) and expr and expr[0] == keyword


def _number(tok) -> Fraction | None:
    if isinstance(tok, list):
        return None
    try:
        return Fraction(str(tok))
    except (ValueError, ZeroDivisionError):
        return None


class _Scope:
    """Variables in scope with their types, used for type checking."""

    def __init__(self, domain: LiftedDomain, params, objects=None):
        self.domain = domain
        self.vars = dict(params)
        self.objects = dict(domain.constants)
        if objects:
            self.objects.update(objects)

    def term_type(self, tok) -> str:
        if isinstance(tok, list):
            raise _err("nested term where an object was expected", tok, PDDLTypeError)
        if tok.startswith("?"):
            if tok not in self.vars:
                raise _err(f"unbound variable {tok}", tok, PDDLTypeError)
            return self.vars[tok]
        if tok not in self.objects:
            raise _err(f"unknown object {tok}", tok, PDDLTypeError)
        return self.objects[tok]

    def symbol(self, node, table, what) -> str:
        name = node[0]
        if isinstance(name, list):
            raise _err(f"malformed {what}", node)
        if name not in table:
            raise _err(f"unknown {what} {name}", node, PDDLTypeError)
        sig = table[name]
        args = node[1:]
        if len(args) != len(sig):
            raise _err(
                f"{what} {name} expects {len(sig)} arguments, got {len(args)}",
                node,
                PDDLTypeError,
            )
        for a, t in zip(args, sig):
            at = self.term_type(a)
            if not self.domain.is_subtype(at, t):
                raise _err(f"argument {a} of type {at} is not a {t}", a, PDDLTypeError)
        return " ".join([str(name)] + [str(a) for a in args])


def _num_expr(node, scope: _Scope, allow_duration=False) -> NumExpr:
    if not isinstance(node, list):
        q = _number(node)
        if q is not None:
            return Const(q)
        if node == "?duration":
            if allow_duration:
                return FluentRef("?duration")
            raise _err("?duration outside a duration constraint", node, UnsupportedFeature)
        if node == "#t":
            raise _err("continuous-effects", node, UnsupportedFeature)
        if node in scope.domain.functions and not scope.domain.functions[node]:
            return FluentRef(str(node))
        raise _err(f"expected a numeric expression, got {node}", node)
    if not node:
        raise _err("empty numeric expression", node)
    head = node[0]
    if head in ("+", "*") and len(node) >= 3:
        acc = _num_expr(node[1], scope, allow_duration)
        for sub in node[2:]:
            acc = BinOp(str(head), acc, _num_expr(sub, scope, allow_duration))
        return acc
    if head == "-" and len(node) == 2:
        return Neg(_num_expr(node[1], scope, allow_duration))
    if head in ("-", "/") and len(node) == 3:
        return BinOp(
            str(head),
            _num_expr(node[1], scope, allow_duration),
            _num_expr(node[2], scope, allow_duration),
        )
    if head in ("+", "-", "*", "/"):
        raise _err(f"wrong arity for {head}", node)
    return FluentRef(scope.symbol(node, scope.domain.functions, "function"))


_QUANTIFIERS = {"forall", "exists"}


def _formula(node, scope: _Scope) -> Formula:
    if not isinstance(node, list):
        raise _err(f"expected a formula, got {node}", node)
    if not node:
        return TRUE
    head = node[0]
    if head == "and":
        return conj(*(_formula(x, scope) for x in node[1:]))
    if head == "or":
        return disj(*(_formula(x, scope) for x in node[1:]))
    if head == "not":
        if len(node) != 2:
            raise _err("not takes one argument", node)
        return neg(_formula(node[1], scope))
    if head == "imply":
        if len(node) != 3:
            raise _err("imply takes two arguments", node)
        return disj(neg(_formula(node[1], scope)), _formula(node[2], scope))
    if head in _QUANTIFIERS:
        raise _err("quantified-preconditions", node, UnsupportedFeature)
    if len(node) == 3 and (
        (head == "at" and node[1] in ("start", "end")) or (head == "over" and node[1] == "all")
    ):
        raise _err("timed condition outside a durative action", node)
    if head in ("<", "<=", "=", ">=", ">"):
        if len(node) != 3:
            raise _err(f"{head} takes two arguments", node)
        if head == "=" and _is_object_term(node[1], scope) and _is_object_term(node[2], scope):
            return _ObjectEq(str(node[1]), str(node[2])).formula()
        return Compare(str(head), _num_expr(node[1], scope), _num_expr(node[2], scope))
    return Atom(scope.symbol(node, scope.domain.predicates, "predicate"))


def _is_object_term(tok, scope: _Scope) -> bool:
    if isinstance(tok, list):
        return False
    return tok.startswith("?") and tok in scope.vars or tok in scope.objects


@dataclass(frozen=True)
class _ObjectEq:
    left: str
    right: str

    def formula(self) -> Formula:
        if not (self.left.startswith("?") or self.right.startswith("?")):
            return TRUE if self.left == self.right else FALSE
        # resolved at grounding time through the reserved "=" pseudo-atom
        return Atom(f"= {self.left} {self.right}")


def _effects(node, scope: _Scope) -> list[Effect]:
    if not isinstance(node, list):
        raise _err(f"expected an effect, got {node}", node)
    if not node:
        return []
    head = node[0]
    if head == "and":
        out = []
        for sub in node[1:]:
            out.extend(_effects(sub, scope))
        return out
    if head == "when":
        raise _err("conditional-effects", node, UnsupportedFeature)
    if head == "forall":
        raise _err("quantified-effects", node, UnsupportedFeature)
    if head == "not":
        if len(node) != 2 or not isinstance(node[1], list):
            raise _err("malformed negative effect", node)
        return [Effect(scope.symbol(node[1], scope.domain.predicates, "predicate"), ASSIGN, False)]
    if head in ("assign", "increase", "decrease", "scale-up", "scale-down"):
        if head.startswith("scale"):
            raise _err(head, node, UnsupportedFeature)
        if len(node) != 3 or not isinstance(node[1], list):
            raise _err(f"malformed {head} effect", node)
        target = scope.symbol(node[1], scope.domain.functions, "function")
        if _mentions(node[2], "#t"):
            raise _err("continuous-effects", node, UnsupportedFeature)
        value = _num_expr(node[2], scope)
        if head == "assign":
            return [Effect(target, ASSIGN, value)]
        if head == "decrease":
            value = Neg(value)
        return [Effect(target, INCREASE, value)]
    if len(node) == 3 and (
        (head == "at" and node[1] in ("start", "end")) or (head == "over" and node[1] == "all")
    ):
        raise _err("timed effect outside a durative action", node)
    return [Effect(scope.symbol(node, scope.domain.predicates, "predicate"), ASSIGN, True)]


def _mentions(node, tok) -> bool:
    if isinstance(node, list):
        return any(_mentions(x, tok) for x in node)
    return node == tok


def _rate(node, scope: _Scope) -> NumExpr:
    """The rate ``e`` out of ``(* #t e)``, ``(* e #t)`` or ``#t``."""
    if node == "#t":
        return Const(1)
    if isinstance(node, list) and len(node) == 3 and node[0] == "*":
        if node[1] == "#t" and not _mentions(node[2], "#t"):
            return _num_expr(node[2], scope)
        if node[2] == "#t" and not _mentions(node[1], "#t"):
            return _num_expr(node[1], scope)
    raise _err("process effects must have the form (* #t e)", node, UnsupportedFeature)


def _process_effects(node, scope: _Scope) -> list[tuple[str, NumExpr]]:
    if not isinstance(node, list) or not node:
        return []
    head = node[0]
    if head == "and":
        out = []
        for sub in node[1:]:
            out.extend(_process_effects(sub, scope))
        return out
    if head in ("increase", "decrease") and len(node) == 3:
        target = scope.symbol(node[1], scope.domain.functions, "function")
        rate = _rate(node[2], scope)
        return [(target, Neg(rate) if head == "decrease" else rate)]
    raise _err("process effects must be increase/decrease with #t", node, UnsupportedFeature)


def _keyword_args(node, start: int, allowed: set[str], what: str) -> dict:
    out = {}
    i = start
    while i < len(node):
        key = node[i]
        if isinstance(key, list) or not key.startswith(":"):
            raise _err(f"{what}: expected a keyword, got {key if not isinstance(key, list) else '(...)'}", key if not isinstance(key, list) else node)
        if key not in allowed:
            raise _err(f"{what}: unexpected {key}", key)
        if i + 1 >= len(node):
            raise _err(f"{what}: missing value for {key}", key)
        out[str(key)] = node[i + 1]
        i += 2
    return out


def _parse_params(node, name) -> list[tuple[str, str]]:
    if node is None:
        return []
    if not isinstance(node, list):
        raise _err(f"{name}: :parameters must be a list", node)
    params = _typed_list(node, node)
    for p, _ in params:
        if not p.startswith("?"):
            raise _err(f"{name}: parameter {p} must start with '?'", node)
    return params


def _check_types(domain: LiftedDomain, params, node):
    for p, t in params:
        if t != "object" and t not in domain.types:
            raise _err(f"unknown type {t} for {p}", node, PDDLTypeError)


def _duration(node, name) -> tuple[Fraction, Fraction]:
    bounds: dict[str, Fraction] = {}

    def bound(c):
        if not (isinstance(c, list) and len(c) == 3 and c[1] == "?duration"):
            raise _err(f"{name}: unsupported duration constraint", c, UnsupportedFeature)
        q = _number(c[2])
        if q is None:
            raise _err(
                f"{name}: duration bounds must be constants", c, UnsupportedFeature
            )
        if c[0] == "=":
            bounds["lb"] = bounds["ub"] = q
        elif c[0] == ">=":
            bounds["lb"] = q
        elif c[0] == "<=":
            bounds["ub"] = q
        else:
            raise _err(f"{name}: unsupported duration comparator {c[0]}", c, UnsupportedFeature)

    if isinstance(node, list) and node and node[0] == "and":
        for c in node[1:]:
            bound(c)
    else:
        bound(node)
    if "lb" not in bounds or "ub" not in bounds:
        raise _err(f"{name}: duration needs both a lower and an upper bound", node)
    if not 0 < bounds["lb"] <= bounds["ub"]:
        raise _err(f"{name}: need 0 < lower bound <= upper bound", node)
    return bounds["lb"], bounds["ub"]


def _timed_parts(node, name, what):
    """Split ``(and (at start x) (over all y) (at end z))`` by timing."""
    parts = {"start": [], "end": [], "all": []}
    if not isinstance(node, list) or not node:
        return parts
    items = node[1:] if node[0] == "and" else [node]
    for it in items:
        if not isinstance(it, list) or not it:
            raise _err(f"{name}: malformed {what}", node)
        if it[0] == "and":
            sub = _timed_parts(it, name, what)
            for k in parts:
                parts[k].extend(sub[k])
            continue
        if it[0] == "at" and len(it) == 3 and it[1] in ("start", "end"):
            parts[str(it[1])].append(it[2])
        elif it[0] == "over" and len(it) == 3 and it[1] == "all":
            parts["all"].append(it[2])
        elif it[0] in ("increase", "decrease") and _mentions(it, "#t"):
            raise _err("continuous-effects", it, UnsupportedFeature)
        elif it[0] == "at" and len(it) == 3 and _number(it[1]) is not None:
            raise _err("delayed or timed effects", it, UnsupportedFeature)
        else:
            raise _err(f"{name}: {what} must be wrapped in at start/at end/over all", it)
    if what == "effect" and parts["all"]:
        raise _err("continuous-effects", node, UnsupportedFeature)
    return parts


def _parse_schema(node, domain: LiftedDomain) -> Schema:
    kind = {
        ":action": "action",
        ":durative-action": "durative",
        ":process": "process",
        ":event": "event",
    }[node[0]]
    if len(node) < 2 or isinstance(node[1], list):
        raise _err(f"{node[0]} without a name", node)
    name = str(node[1])
    if kind == "durative":
        allowed = {":parameters", ":duration", ":condition", ":effect"}
    else:
        allowed = {":parameters", ":precondition", ":effect"}
    kw = _keyword_args(node, 2, allowed, name)
    params = _parse_params(kw.get(":parameters"), name)
    _check_types(domain, params, node)
    scope = _Scope(domain, params)
    schema = Schema(name, kind, params, line=node.line if isinstance(node, SList) else None)
    if kind == "durative":
        if ":duration" not in kw:
            raise _err(f"durative action {name}: missing :duration", node)
        schema.lb, schema.ub = _duration(kw[":duration"], name)
        cond = _timed_parts(kw.get(":condition"), name, "condition")
        schema.start_pre = conj(*(_formula(c, scope) for c in cond["start"]))
        schema.end_pre = conj(*(_formula(c, scope) for c in cond["end"]))
        schema.overall = conj(*(_formula(c, scope) for c in cond["all"]))
        eff = _timed_parts(kw.get(":effect"), name, "effect")
        for e in eff["start"]:
            schema.start_eff.extend(_effects(e, scope))
        for e in eff["end"]:
            schema.end_eff.extend(_effects(e, scope))
        return schema
    if ":precondition" in kw:
        schema.pre = _formula(kw[":precondition"], scope)
    if kind == "process":
        schema.rates = _process_effects(kw.get(":effect"), scope)
    elif ":effect" in kw:
        schema.eff = _effects(kw[":effect"], scope)
    return schema


def parse_domain(text: str) -> LiftedDomain:
    root = parse_sexpr(text)
    if not (_section(root, "define") and len(root) >= 2 and _section(root[1], "domain")):
        raise _err("expected (define (domain ...) ...)", root)
    domain = LiftedDomain(
        name=str(root[1][1]) if len(root[1]) > 1 else "domain",
        requirements=[],
        types={},
        constants={},
        predicates={},
        functions={},
        schemas=[],
    )
    schema_nodes = []
    for sec in root[2:]:
        if not isinstance(sec, list) or not sec:
            raise _err("malformed domain section", sec if isinstance(sec, list) else root)
        key = sec[0]
        if key == ":requirements":
            for r in sec[1:]:
                if r in UNSUPPORTED_REQUIREMENTS:
                    raise _err(UNSUPPORTED_REQUIREMENTS[r], r, UnsupportedFeature)
                if r not in SUPPORTED_REQUIREMENTS:
                    raise _err(str(r).lstrip(":"), r, UnsupportedFeature)
                domain.requirements.append(str(r))
        elif key == ":types":
            for t, parent in _typed_list(sec[1:], sec):
                domain.types[t] = parent
            for parent in list(domain.types.values()):
                if parent != "object" and parent not in domain.types:
                    domain.types[parent] = "object"
        elif key == ":constants":
            for c, t in _typed_list(sec[1:], sec):
                domain.constants[c] = t
        elif key == ":predicates":
            for p in sec[1:]:
                if not isinstance(p, list) or not p:
                    raise _err("malformed predicate declaration", sec)
                domain.predicates[str(p[0])] = [t for _, t in _typed_list(p[1:], p)]
        elif key == ":functions":
            items = sec[1:]
            i = 0
            while i < len(items):
                f = items[i]
                if not isinstance(f, list) or not f:
                    raise _err("malformed function declaration", sec)
                i += 1
                if i < len(items) and items[i] == "-":
                    if i + 1 >= len(items) or items[i + 1] != "number":
                        raise _err("object-fluents", sec, UnsupportedFeature)
                    i += 2
                domain.functions[str(f[0])] = [t for _, t in _typed_list(f[1:], f)]
        elif key in (":action", ":durative-action", ":process", ":event"):
            schema_nodes.append(sec)
        elif key == ":derived":
            raise _err("derived-predicates", sec, UnsupportedFeature)
        elif key == ":constraints":
            raise _err("constraints", sec, UnsupportedFeature)
        else:
            raise _err(f"unknown domain section {key}", sec)
    for node in schema_nodes:
        domain.schemas.append(_parse_schema(node, domain))
    names = [s.name for s in domain.schemas]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise PDDLSyntaxError(f"duplicate operator names: {sorted(dup)}")
    return domain


def _ground_term_atom(node, scope: _Scope, table, what) -> str:
    for a in node[1:]:
        if isinstance(a, str) and a.startswith("?"):
            raise _err(f"variable {a} in problem", a, PDDLTypeError)
    return scope.symbol(node, table, what)


def parse_problem(text: str, domain: LiftedDomain) -> LiftedProblem:
    root = parse_sexpr(text)
    if not (_section(root, "define") and len(root) >= 2 and _section(root[1], "problem")):
        raise _err("expected (define (problem ...) ...)", root)
    prob = LiftedProblem(
        name=str(root[1][1]) if len(root[1]) > 1 else "problem",
        domain=domain.name,
        objects={},
        init_true=[],
        init_values={},
        goal=TRUE,
    )
    sections = {}
    for sec in root[2:]:
        if not isinstance(sec, list) or not sec:
            raise _err("malformed problem section", root)
        sections.setdefault(str(sec[0]), sec)
    if ":domain" in sections:
        d = sections[":domain"]
        if len(d) < 2 or d[1] != domain.name:
            raise _err(f"problem is for domain {d[1] if len(d) > 1 else '?'}, not {domain.name}", d)
    for key in sections:
        if key not in (":domain", ":objects", ":init", ":goal", ":metric", ":requirements"):
            raise _err(f"unknown problem section {key}", sections[key])
    if ":objects" in sections:
        for o, t in _typed_list(sections[":objects"][1:], sections[":objects"]):
            if t != "object" and t not in domain.types:
                raise _err(f"unknown type {t} for object {o}", sections[":objects"], PDDLTypeError)
            prob.objects[o] = t
    scope = _Scope(domain, [], prob.objects)
    for fact in sections.get(":init", [None])[1:]:
        if not isinstance(fact, list) or not fact:
            raise _err("malformed init entry", sections[":init"])
        if fact[0] == "at" and len(fact) == 3 and _number(fact[1]) is not None:
            raise _err("timed-initial-literals", fact, UnsupportedFeature)
        if fact[0] == "=":
            if len(fact) != 3 or not isinstance(fact[1], list):
                raise _err("malformed numeric init", fact)
            value = _number(fact[2])
            if value is None:
                raise _err("numeric init value must be a number", fact)
            prob.init_values[_ground_term_atom(fact[1], scope, domain.functions, "function")] = value
        elif fact[0] == "not":
            continue
        else:
            prob.init_true.append(_ground_term_atom(fact, scope, domain.predicates, "predicate"))
    if ":goal" in sections:
        g = sections[":goal"]
        if len(g) != 2:
            raise _err("malformed goal", g)
        prob.goal = _formula(g[1], scope)
    if ":metric" in sections:
        log.warning("ignoring :metric (metric optimisation is not supported)")
    return prob
