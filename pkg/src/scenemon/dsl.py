"""Property-spec language for abstract scene graphs.

One `.asg` file holds one property in block form:

    // braking trigger: a halted obstacle close ahead in the ego's lane
    asg "obstacle-ahead" {
      node ego: Vehicle;
      node obstacle: Static;
      node lane: Lane;
      ego ego;
      edge ego isIn lane;
      edge obstacle isIn lane;
      edge obstacle inFrontOf ego;
      assert obstacle.velocity == 0;
      assert dist(ego, obstacle) in (0, 20];
    }

`assert` statements become the property's ordered predicate list; their
order is the order violation causes are reported in. The expression grammar
covers comparisons, closed/open interval membership, function calls over
pattern nodes, and `and` conjunction; see docs/asg-grammar.ebnf.

The parser is hand-written recursive descent over the shared tokenizer so
errors carry exact line/column positions, and parsing is total: any input
either yields an AbstractSceneGraph or raises a located package error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SpecSyntaxError, SpecTypeError
from .lexing import (
    KIND_EOF,
    KIND_IDENT,
    KIND_NUMBER,
    KIND_STRING,
    Token,
    TokenStream,
    tokenize,
)
from .object_model import NODE_PARAM, ObjectModel
from .scene_graph import AbstractSceneGraph, validate_asg

# "ego" stays legal as a node id: the ego declaration is identified by its
# statement position, so the conventional `node ego: Vehicle; ego ego;`
# spelling stays unambiguous.
RESERVED = frozenset({"asg", "node", "edge", "assert", "and", "in", "true", "false"})

_COMPARE_OPS = ("==", "!=", "<=", ">=", "<", ">")


def _fmt_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class Expr:
    """Base expression node.

    Positions point at the node's first token; they inform error messages
    only and are excluded from structural equality so a re-parsed
    serialization compares equal to its source AST.
    """

    line: int = field(compare=False)
    column: int = field(compare=False)

    def pattern_ids(self) -> frozenset[str]:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class NumberLit(Expr):
    value: float

    def pattern_ids(self) -> frozenset[str]:
        return frozenset()

    def to_text(self) -> str:
        return _fmt_number(self.value)


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool

    def pattern_ids(self) -> frozenset[str]:
        return frozenset()

    def to_text(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class StringLit(Expr):
    value: str

    def pattern_ids(self) -> frozenset[str]:
        return frozenset()

    def to_text(self) -> str:
        escaped = self.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'


@dataclass(frozen=True)
class NodeRef(Expr):
    """Bare pattern-node reference; only valid as a function argument."""

    name: str

    def pattern_ids(self) -> frozenset[str]:
        return frozenset({self.name})

    def to_text(self) -> str:
        return self.name


@dataclass(frozen=True)
class AttrRef(Expr):
    node_id: str
    attr: str

    def pattern_ids(self) -> frozenset[str]:
        return frozenset({self.node_id})

    def to_text(self) -> str:
        return f"{self.node_id}.{self.attr}"


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple[Expr, ...]

    def pattern_ids(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= a.pattern_ids()
        return out

    def to_text(self) -> str:
        return f"{self.fn}({', '.join(a.to_text() for a in self.args)})"


@dataclass(frozen=True)
class Compare(Expr):
    op: str
    left: Expr
    right: Expr

    def pattern_ids(self) -> frozenset[str]:
        return self.left.pattern_ids() | self.right.pattern_ids()

    def to_text(self) -> str:
        return f"{self.left.to_text()} {self.op} {self.right.to_text()}"


@dataclass(frozen=True)
class InInterval(Expr):
    """value in (lo, hi] style membership; each bound open or closed."""

    value: Expr
    lo: Expr
    hi: Expr
    lo_closed: bool
    hi_closed: bool

    def pattern_ids(self) -> frozenset[str]:
        return self.value.pattern_ids() | self.lo.pattern_ids() | self.hi.pattern_ids()

    def to_text(self) -> str:
        lo_b = "[" if self.lo_closed else "("
        hi_b = "]" if self.hi_closed else ")"
        return (f"{self.value.to_text()} in {lo_b}{self.lo.to_text()}, "
                f"{self.hi.to_text()}{hi_b}")


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr

    def pattern_ids(self) -> frozenset[str]:
        return self.left.pattern_ids() | self.right.pattern_ids()

    def to_text(self) -> str:
        return f"{self.left.to_text()} and {self.right.to_text()}"


# -- parsing ---------------------------------------------------------------


def parse_asg(text: str, om: ObjectModel) -> AbstractSceneGraph:
    """Parse and type-check one property spec against an object model.

    Raises SpecSyntaxError for malformed text, SpecTypeError for well-formed
    text that misuses the vocabulary, and SceneValidationError for structural
    problems (disconnected pattern, bad ego class). All carry positions where
    one exists.
    """
    ts = TokenStream(tokenize(text))
    open_tok = ts.expect_keyword("asg")
    name_tok = ts.peek()
    if name_tok.kind != KIND_STRING:
        raise SpecSyntaxError("expected property name string after 'asg'",
                              name_tok.line, name_tok.column)
    ts.next()
    ts.expect_punct("{")
    nodes: dict[str, str] = {}
    node_tokens: dict[str, Token] = {}
    edges: list[tuple[str, str, str]] = []
    edge_tokens: list[Token] = []
    ego_id: str | None = None
    predicates: list[Expr] = []
    while not ts.accept_punct("}"):
        tok = ts.peek()
        if tok.kind == KIND_EOF:
            raise SpecSyntaxError("unexpected end of input inside asg block",
                                  tok.line, tok.column)
        if ts.at_keyword("node"):
            ts.next()
            id_tok = ts.expect_ident("pattern node id")
            if id_tok.text in RESERVED:
                raise SpecSyntaxError(f"{id_tok.text!r} is a reserved word",
                                      id_tok.line, id_tok.column)
            ts.expect_punct(":")
            cls_tok = ts.expect_ident("class name")
            ts.expect_punct(";")
            if id_tok.text in nodes:
                raise SpecTypeError(f"duplicate pattern node {id_tok.text!r}",
                                    id_tok.line, id_tok.column)
            nodes[id_tok.text] = cls_tok.text
            node_tokens[id_tok.text] = cls_tok
        elif ts.at_keyword("edge"):
            ts.next()
            src_tok = ts.expect_ident("source node id")
            rel_tok = ts.expect_ident("relationship name")
            dst_tok = ts.expect_ident("target node id")
            ts.expect_punct(";")
            edges.append((src_tok.text, rel_tok.text, dst_tok.text))
            edge_tokens.append(rel_tok)
        elif ts.at_keyword("ego"):
            ego_tok = ts.next()
            id_tok = ts.expect_ident("ego node id")
            ts.expect_punct(";")
            if ego_id is not None:
                raise SpecTypeError("duplicate ego declaration",
                                    ego_tok.line, ego_tok.column)
            ego_id = id_tok.text
        elif ts.at_keyword("assert"):
            ts.next()
            predicates.append(_parse_expr(ts))
            ts.expect_punct(";")
        else:
            raise SpecSyntaxError(
                f"expected node, edge, ego, or assert, found {tok.text or 'end of input'!r}",
                tok.line, tok.column)
    ts.expect_eof()
    if ego_id is None:
        raise SpecTypeError("missing ego declaration", open_tok.line, open_tok.column)
    if ego_id not in nodes:
        raise SpecTypeError(f"ego references undeclared node {ego_id!r}",
                            open_tok.line, open_tok.column)
    for cls_tok in node_tokens.values():
        if not om.has_class(cls_tok.text):
            raise SpecTypeError(f"unknown class {cls_tok.text!r}",
                                cls_tok.line, cls_tok.column)
    for (src, rel, dst), rel_tok in zip(edges, edge_tokens):
        for pid in (src, dst):
            if pid not in nodes:
                raise SpecTypeError(f"edge references undeclared node {pid!r}",
                                    rel_tok.line, rel_tok.column)
        if rel not in om.relationship_names():
            raise SpecTypeError(f"unknown relationship {rel!r}",
                                rel_tok.line, rel_tok.column)
    for pred in predicates:
        t = _check_expr(pred, nodes, om)
        if t != "Bool":
            raise SpecTypeError(f"assert expression has type {t}, expected Bool",
                                pred.line, pred.column)
    asg = AbstractSceneGraph(
        name=name_tok.text,
        pattern_nodes=nodes,
        pattern_edges=frozenset(edges),
        ego_pattern_id=ego_id,
        predicates=tuple(predicates),
        om=om,
    )
    validate_asg(asg)
    return asg


def load_asg(path: str, om: ObjectModel) -> AbstractSceneGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_asg(fh.read(), om)


def _parse_expr(ts: TokenStream) -> Expr:
    left = _parse_comparison(ts)
    while ts.at_keyword("and"):
        and_tok = ts.next()
        right = _parse_comparison(ts)
        left = And(and_tok.line, and_tok.column, left, right)
    return left


def _parse_comparison(ts: TokenStream) -> Expr:
    left = _parse_operand(ts)
    for op in _COMPARE_OPS:
        if ts.at_punct(op):
            ts.next()
            right = _parse_operand(ts)
            return Compare(left.line, left.column, op, left, right)
    if ts.at_keyword("in"):
        ts.next()
        tok = ts.peek()
        if ts.accept_punct("("):
            lo_closed = False
        elif ts.accept_punct("["):
            lo_closed = True
        else:
            raise SpecSyntaxError("expected '(' or '[' to open interval", tok.line, tok.column)
        lo = _parse_operand(ts)
        ts.expect_punct(",")
        hi = _parse_operand(ts)
        tok = ts.peek()
        if ts.accept_punct(")"):
            hi_closed = False
        elif ts.accept_punct("]"):
            hi_closed = True
        else:
            raise SpecSyntaxError("expected ')' or ']' to close interval", tok.line, tok.column)
        return InInterval(left.line, left.column, left, lo, hi, lo_closed, hi_closed)
    return left


def _parse_operand(ts: TokenStream) -> Expr:
    tok = ts.peek()
    if ts.accept_punct("-"):
        num = ts.peek()
        if num.kind != KIND_NUMBER:
            raise SpecSyntaxError("expected number after '-'", num.line, num.column)
        ts.next()
        return NumberLit(tok.line, tok.column, -float(num.text))
    if tok.kind == KIND_NUMBER:
        ts.next()
        return NumberLit(tok.line, tok.column, float(tok.text))
    if tok.kind == KIND_STRING:
        ts.next()
        return StringLit(tok.line, tok.column, tok.text)
    if tok.kind == KIND_IDENT:
        if tok.text == "true":
            ts.next()
            return BoolLit(tok.line, tok.column, True)
        if tok.text == "false":
            ts.next()
            return BoolLit(tok.line, tok.column, False)
        ts.next()
        if ts.accept_punct("."):
            attr_tok = ts.expect_ident("attribute name")
            return AttrRef(tok.line, tok.column, tok.text, attr_tok.text)
        if ts.accept_punct("("):
            args: list[Expr] = []
            if not ts.at_punct(")"):
                while True:
                    args.append(_parse_operand(ts))
                    if not ts.accept_punct(","):
                        break
            ts.expect_punct(")")
            return Call(tok.line, tok.column, tok.text, tuple(args))
        return NodeRef(tok.line, tok.column, tok.text)
    raise SpecSyntaxError(f"expected expression, found {tok.text or 'end of input'!r}",
                          tok.line, tok.column)


# -- type checking ---------------------------------------------------------

_NUMERIC = ("Real", "Int")


def _is_numeric(t: str) -> bool:
    return t in _NUMERIC


def _check_expr(expr: Expr, nodes: dict[str, str], om: ObjectModel) -> str:
    """Return the expression's base type, raising SpecTypeError on misuse."""
    if isinstance(expr, NumberLit):
        return "Real"
    if isinstance(expr, BoolLit):
        return "Bool"
    if isinstance(expr, StringLit):
        return "String"
    if isinstance(expr, NodeRef):
        raise SpecTypeError(
            f"pattern node {expr.name!r} can only appear as a function argument",
            expr.line, expr.column)
    if isinstance(expr, AttrRef):
        if expr.node_id not in nodes:
            raise SpecTypeError(f"unknown pattern node {expr.node_id!r}",
                                expr.line, expr.column)
        cls = nodes[expr.node_id]
        decl = om.find_attribute(cls, expr.attr)
        if decl is None:
            raise SpecTypeError(f"class {cls} has no attribute {expr.attr!r}",
                                expr.line, expr.column)
        return decl.type
    if isinstance(expr, Call):
        fn = om.find_function(expr.fn)
        if fn is None:
            raise SpecTypeError(f"unknown function {expr.fn!r}", expr.line, expr.column)
        if len(expr.args) != len(fn.params):
            raise SpecTypeError(
                f"function {expr.fn} expects {len(fn.params)} arguments, got {len(expr.args)}",
                expr.line, expr.column)
        for arg, param in zip(expr.args, fn.params):
            if param == NODE_PARAM:
                if not isinstance(arg, NodeRef):
                    raise SpecTypeError(
                        f"function {expr.fn} expects a pattern node here",
                        arg.line, arg.column)
                if arg.name not in nodes:
                    raise SpecTypeError(f"unknown pattern node {arg.name!r}",
                                        arg.line, arg.column)
            else:
                t = _check_expr(arg, nodes, om)
                if t != param and not (_is_numeric(t) and _is_numeric(param)):
                    raise SpecTypeError(
                        f"function {expr.fn} expects {param} here, got {t}",
                        arg.line, arg.column)
        return fn.result
    if isinstance(expr, Compare):
        lt = _check_expr(expr.left, nodes, om)
        rt = _check_expr(expr.right, nodes, om)
        if _is_numeric(lt) and _is_numeric(rt):
            return "Bool"
        if expr.op in ("==", "!=") and lt == rt and lt in ("Bool", "String"):
            return "Bool"
        raise SpecTypeError(f"cannot compare {lt} {expr.op} {rt}", expr.line, expr.column)
    if isinstance(expr, InInterval):
        for part, what in ((expr.value, "interval subject"), (expr.lo, "lower bound"),
                           (expr.hi, "upper bound")):
            t = _check_expr(part, nodes, om)
            if not _is_numeric(t):
                raise SpecTypeError(f"{what} must be numeric, got {t}",
                                    part.line, part.column)
        return "Bool"
    if isinstance(expr, And):
        for side in (expr.left, expr.right):
            t = _check_expr(side, nodes, om)
            if t != "Bool":
                raise SpecTypeError(f"'and' operand must be Bool, got {t}",
                                    side.line, side.column)
        return "Bool"
    raise SpecTypeError(f"unsupported expression {expr!r}", expr.line, expr.column)


# -- serialization ---------------------------------------------------------


def serialize_asg(asg: AbstractSceneGraph) -> str:
    """Render an ASG back to spec text.

    Canonical form: nodes in declaration order, sorted edges, predicates in
    their reporting order. parse_asg(serialize_asg(a)) is structurally equal
    to `a`.
    """
    name = asg.name.replace("\\", "\\\\").replace('"', '\\"')
    lines = [f'asg "{name}" {{']
    for pid, cls in asg.pattern_nodes.items():
        lines.append(f"  node {pid}: {cls};")
    lines.append(f"  ego {asg.ego_pattern_id};")
    for src, rel, dst in sorted(asg.pattern_edges):
        lines.append(f"  edge {src} {rel} {dst};")
    for pred in asg.predicates:
        lines.append(f"  assert {pred.to_text()};")
    lines.append("}")
    return "\n".join(lines) + "\n"
