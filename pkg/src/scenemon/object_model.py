"""Object model: the typed vocabulary scenes and properties are checked against.

An ObjectModel declares the class hierarchy, per-class attributes, the
relationship types that may connect instances, the comparison operators
available to predicates, and the function symbols (such as dist) usable in
property specs. Scene graphs and property specs are only meaningful relative
to one object model, and both validate against it at load time.

The schema text format is line-oriented:

    abstract class TrafficParticipant extends Entity {
      velocity: Real;
      position: Vec2;
    }
    class Vehicle extends TrafficParticipant;
    rel isIn: Entity -> Lane;
    fn dist(node, node) -> Real;

The exact grammar ships in docs/schema-grammar.ebnf.
"""
from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

from .errors import SchemaError
from .lexing import KIND_EOF, TokenStream, tokenize

BASE_TYPES: tuple[str, ...] = ("Real", "Int", "Bool", "String", "Vec2")

# Comparison operators predicates may use. Fixed vocabulary, not declared in
# schema text.
PREDICATE_SYMBOLS: tuple[str, ...] = ("==", "!=", "<", "<=", ">", ">=")

# Marker for function parameters that take a pattern node rather than a value.
NODE_PARAM = "node"


@dataclass(frozen=True)
class AttributeDef:
    name: str
    type: str


@dataclass(frozen=True)
class ClassDef:
    name: str
    parent: str | None
    abstract: bool
    # Attributes declared on this class itself; inherited ones are resolved
    # through ObjectModel.attributes_of.
    attributes: tuple[AttributeDef, ...] = ()


@dataclass(frozen=True)
class RelationshipType:
    """One allowed edge shape: `name` edges from `source` to `target` classes.

    The same name may appear in several rows with different endpoints; an
    edge is allowed if any row admits it under the class hierarchy.
    """

    name: str
    source: str
    target: str


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    params: tuple[str, ...]  # each NODE_PARAM or a base type
    result: str


@dataclass(frozen=True)
class ObjectModel:
    classes: tuple[ClassDef, ...] = ()
    relationships: tuple[RelationshipType, ...] = ()
    functions: tuple[FunctionSymbol, ...] = ()
    base_types: tuple[str, ...] = BASE_TYPES
    predicate_symbols: tuple[str, ...] = PREDICATE_SYMBOLS
    _by_name: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        self._by_name.update({c.name: c for c in self.classes})

    # -- class hierarchy -------------------------------------------------

    def has_class(self, name: str) -> bool:
        return name in self._by_name

    def require_class(self, name: str) -> ClassDef:
        cls = self._by_name.get(name)
        if cls is None:
            raise SchemaError(f"unknown class: {name}")
        return cls

    def is_subclass(self, sub: str, sup: str) -> bool:
        """True iff `sub` equals `sup` or derives from it transitively."""
        self.require_class(sup)
        cur: str | None = self.require_class(sub).name
        while cur is not None:
            if cur == sup:
                return True
            cur = self._by_name[cur].parent
        return False

    def concrete_classes(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes if not c.abstract)

    def attributes_of(self, cls_name: str) -> tuple[AttributeDef, ...]:
        """All attributes of a class, inherited ones first, in declaration order."""
        chain: list[ClassDef] = []
        cur: str | None = self.require_class(cls_name).name
        while cur is not None:
            cls = self._by_name[cur]
            chain.append(cls)
            cur = cls.parent
        out: list[AttributeDef] = []
        for cls in reversed(chain):
            out.extend(cls.attributes)
        return tuple(out)

    def find_attribute(self, cls_name: str, attr: str) -> AttributeDef | None:
        for a in self.attributes_of(cls_name):
            if a.name == attr:
                return a
        return None

    # -- relationships and functions -------------------------------------

    def relationship_names(self) -> tuple[str, ...]:
        seen: list[str] = []
        for r in self.relationships:
            if r.name not in seen:
                seen.append(r.name)
        return tuple(seen)

    def find_function(self, name: str) -> FunctionSymbol | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None


def is_relationship_allowed(om: ObjectModel, rel: str, src_class: str, dst_class: str) -> bool:
    """True iff an edge `src_class -rel-> dst_class` is admitted by `om`.

    Admission follows the class hierarchy: a row declared on a superclass
    admits all its subclasses at either endpoint. Unknown relationship or
    class names raise SchemaError.
    """
    om.require_class(src_class)
    om.require_class(dst_class)
    rows = [r for r in om.relationships if r.name == rel]
    if not rows:
        raise SchemaError(f"unknown relationship: {rel}")
    return any(
        om.is_subclass(src_class, r.source) and om.is_subclass(dst_class, r.target)
        for r in rows
    )


# -- schema text parsing ---------------------------------------------------


def parse_object_model(text: str) -> ObjectModel:
    """Parse schema text into a validated ObjectModel.

    Raises SpecSyntaxError (with line/column) on malformed text and
    SchemaError naming the offending declaration on semantic problems.
    """
    ts = TokenStream(tokenize(text))
    classes: list[ClassDef] = []
    relationships: list[RelationshipType] = []
    functions: list[FunctionSymbol] = []
    while ts.peek().kind != KIND_EOF:
        if ts.at_keyword("abstract") or ts.at_keyword("class"):
            classes.append(_parse_class(ts))
        elif ts.at_keyword("rel"):
            relationships.append(_parse_rel(ts))
        elif ts.at_keyword("fn"):
            functions.append(_parse_fn(ts))
        else:
            tok = ts.peek()
            raise SchemaErrorAt(tok, f"expected class, rel, or fn declaration, found {tok.text!r}")
    om = ObjectModel(tuple(classes), tuple(relationships), tuple(functions))
    _validate_object_model(om)
    return om


def SchemaErrorAt(tok, message: str) -> SchemaError:  # noqa: N802 - raise helper
    return SchemaError(f"{tok.line}:{tok.column}: {message}")


def _parse_class(ts: TokenStream) -> ClassDef:
    abstract = False
    if ts.at_keyword("abstract"):
        ts.next()
        abstract = True
    ts.expect_keyword("class")
    name = ts.expect_ident("class name").text
    parent: str | None = None
    if ts.at_keyword("extends"):
        ts.next()
        parent = ts.expect_ident("superclass name").text
    attrs: list[AttributeDef] = []
    if ts.accept_punct("{"):
        while not ts.accept_punct("}"):
            attr_name = ts.expect_ident("attribute name").text
            ts.expect_punct(":")
            type_tok = ts.expect_ident("attribute type")
            ts.expect_punct(";")
            attrs.append(AttributeDef(attr_name, type_tok.text))
        ts.accept_punct(";")
    else:
        ts.expect_punct(";")
    return ClassDef(name, parent, abstract, tuple(attrs))


def _parse_rel(ts: TokenStream) -> RelationshipType:
    ts.expect_keyword("rel")
    name = ts.expect_ident("relationship name").text
    ts.expect_punct(":")
    source = ts.expect_ident("source class").text
    ts.expect_punct("->")
    target = ts.expect_ident("target class").text
    ts.expect_punct(";")
    return RelationshipType(name, source, target)


def _parse_fn(ts: TokenStream) -> FunctionSymbol:
    ts.expect_keyword("fn")
    name = ts.expect_ident("function name").text
    ts.expect_punct("(")
    params: list[str] = []
    if not ts.at_punct(")"):
        while True:
            params.append(ts.expect_ident("parameter kind").text)
            if not ts.accept_punct(","):
                break
    ts.expect_punct(")")
    ts.expect_punct("->")
    result = ts.expect_ident("result type").text
    ts.expect_punct(";")
    return FunctionSymbol(name, tuple(params), result)


def _validate_object_model(om: ObjectModel) -> None:
    seen: set[str] = set()
    for cls in om.classes:
        if cls.name in seen:
            raise SchemaError(f"duplicate class: {cls.name}")
        seen.add(cls.name)
    by_name = {c.name: c for c in om.classes}
    for cls in om.classes:
        if cls.parent is not None and cls.parent not in by_name:
            raise SchemaError(f"class {cls.name} extends unknown class {cls.parent}")
        for a in cls.attributes:
            if a.type not in om.base_types:
                raise SchemaError(f"attribute {cls.name}.{a.name} has unknown type {a.type}")
    # hierarchy must be acyclic before attributes_of can walk it
    for cls in om.classes:
        slow: str | None = cls.name
        seen_chain: set[str] = set()
        while slow is not None:
            if slow in seen_chain:
                raise SchemaError(f"inheritance cycle through class {slow}")
            seen_chain.add(slow)
            slow = by_name[slow].parent
    for cls in om.classes:
        names = [a.name for a in om.attributes_of(cls.name)]
        for n in names:
            if names.count(n) > 1:
                raise SchemaError(f"attribute {n} declared more than once along {cls.name}")
    seen_rel: set[tuple[str, str, str]] = set()
    for r in om.relationships:
        if r.source not in by_name:
            raise SchemaError(f"relationship {r.name} has unknown source class {r.source}")
        if r.target not in by_name:
            raise SchemaError(f"relationship {r.name} has unknown target class {r.target}")
        key = (r.name, r.source, r.target)
        if key in seen_rel:
            raise SchemaError(f"duplicate relationship: {r.name}: {r.source} -> {r.target}")
        seen_rel.add(key)
    seen_fn: set[str] = set()
    for f in om.functions:
        if f.name in seen_fn:
            raise SchemaError(f"duplicate function: {f.name}")
        seen_fn.add(f.name)
        for p in f.params:
            if p != NODE_PARAM and p not in om.base_types:
                raise SchemaError(f"function {f.name} has unknown parameter kind {p}")
        if f.result not in om.base_types:
            raise SchemaError(f"function {f.name} has unknown result type {f.result}")


def serialize_object_model(om: ObjectModel) -> str:
    """Render an ObjectModel back to schema text (load/serialize round-trips)."""
    lines: list[str] = []
    for cls in om.classes:
        head = "abstract class" if cls.abstract else "class"
        ext = f" extends {cls.parent}" if cls.parent else ""
        if cls.attributes:
            lines.append(f"{head} {cls.name}{ext} {{")
            for a in cls.attributes:
                lines.append(f"  {a.name}: {a.type};")
            lines.append("}")
        else:
            lines.append(f"{head} {cls.name}{ext};")
    for r in om.relationships:
        lines.append(f"rel {r.name}: {r.source} -> {r.target};")
    for f in om.functions:
        params = ", ".join(f.params)
        lines.append(f"fn {f.name}({params}) -> {f.result};")
    return "\n".join(lines) + "\n"


def load_object_model(source: str) -> ObjectModel:
    """Load an ObjectModel from a schema file path, or the bundled default.

    `source` may be a filesystem path or the literal string "default".
    """
    if source == "default":
        return default_object_model()
    with open(source, "r", encoding="utf-8") as fh:
        return parse_object_model(fh.read())


def default_object_model() -> ObjectModel:
    """The bundled two-lane urban traffic vocabulary."""
    text = (
        importlib.resources.files("scenemon")
        .joinpath("assets/default.om")
        .read_text(encoding="utf-8")
    )
    return parse_object_model(text)
