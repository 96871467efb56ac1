"""Concrete syntax for policies and safety-problem files.

Expression grammar (``~`` binds tightest, then ``.``, then ``+``)::

    expr    := seq ('+' seq)*
    seq     := unary ('.' unary)*
    unary   := '~' unary | postfix
    postfix := primary ('^' NAT)*
    primary := '(' expr ')' | '0' | '1' | FIELD '=' VALUE
             | FIELD '<-' VALUE | NAME

A problem file is a sequence of statements::

    domains:
      pt: 1..6
      sw: A, B
    let p1 = pt = 1 . pt <- 5 + pt = 6 . pt <- 2
    policy: p1
    topology: pt = 5 . pt <- 6 + ...
    ingress: pt = 1
    egress: pt = 3 + pt = 4
    unfold: 6

Lines starting with whitespace continue the previous statement (or add a
domain entry inside ``domains:``).  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from .errors import MissingSection, PolicySyntaxError, UndeclaredField, ValueOutOfDomain
from .terms import (
    ONE,
    PREDICATE_TYPES,
    ZERO,
    Conj,
    Disj,
    DomainMap,
    Filter,
    Mod,
    Neg,
    Policy,
    Predicate,
    Rep,
    Seq,
    Test,
    Union,
    Value,
    pretty,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<arrow><-|←)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[=+.~()^·¬])
    """,
    re.VERBOSE,
)

_UNICODE_OPS = {"·": ".", "¬": "~", "←": "<-"}


@dataclass
class _Tok:
    kind: str  # 'num' | 'ident' | 'op' | 'eof'
    text: str
    line: int
    col: int


def _lex(text: str, line: int = 1, col: int = 1) -> List[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PolicySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "arrow":
                toks.append(_Tok("op", "<-", line, col))
            elif kind == "op":
                toks.append(_Tok("op", _UNICODE_OPS.get(s, s), line, col))
            elif kind != "ws":
                toks.append(_Tok(kind, s, line, col))
            col += len(s)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


def _value_of(tok: _Tok) -> Value:
    return int(tok.text) if tok.kind == "num" else tok.text


# Raw expression tree, resolved to Policy/Predicate after parsing.
@dataclass(frozen=True)
class _E:
    op: str
    args: tuple = ()
    tok: Optional[_Tok] = field(default=None, compare=False)


class _ExprParser:
    def __init__(self, toks: List[_Tok]):
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def _peek(self, k=1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def _eat(self, text=None, kind=None) -> _Tok:
        t = self.cur
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise PolicySyntaxError(f"expected {want}, got {got}", t.line, t.col)
        self.i += 1
        return t

    def parse(self) -> _E:
        e = self.expr()
        if self.cur.kind != "eof":
            t = self.cur
            raise PolicySyntaxError(f"unexpected {t.text!r}", t.line, t.col)
        return e

    def expr(self) -> _E:
        e = self.seq()
        while self.cur.text == "+" and self.cur.kind == "op":
            t = self._eat("+")
            e = _E("+", (e, self.seq()), t)
        return e

    def seq(self) -> _E:
        e = self.unary()
        while self.cur.text == "." and self.cur.kind == "op":
            t = self._eat(".")
            e = _E(".", (e, self.unary()), t)
        return e

    def unary(self) -> _E:
        if self.cur.kind == "op" and self.cur.text == "~":
            t = self._eat("~")
            return _E("~", (self.unary(),), t)
        return self.postfix()

    def postfix(self) -> _E:
        e = self.primary()
        while self.cur.kind == "op" and self.cur.text == "^":
            t = self._eat("^")
            n = self._eat(kind="num")
            e = _E("^", (e, int(n.text)), t)
        return e

    def primary(self) -> _E:
        t = self.cur
        if t.kind == "op" and t.text == "(":
            self._eat("(")
            e = self.expr()
            self._eat(")")
            return e
        if t.kind == "num" and t.text in ("0", "1"):
            self._eat()
            return _E(t.text, (), t)
        if t.kind == "ident":
            nxt = self._peek()
            if nxt.kind == "op" and nxt.text in ("=", "<-"):
                self._eat()
                self._eat()
                vt = self.cur
                if vt.kind not in ("num", "ident"):
                    got = "end of input" if vt.kind == "eof" else repr(vt.text)
                    raise PolicySyntaxError(f"expected a value, got {got}", vt.line, vt.col)
                self._eat()
                kind = "test" if nxt.text == "=" else "mod"
                return _E(kind, (t.text, _value_of(vt)), t)
            self._eat()
            return _E("name", (t.text,), t)
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise PolicySyntaxError(f"unexpected {got}", t.line, t.col)


class _Resolver:
    def __init__(self, domains: Optional[DomainMap], bindings: Mapping[str, object]):
        self.domains = domains
        self.bindings = bindings

    def _check(self, e: _E, f: str, v: Value):
        if self.domains is None:
            return
        t = e.tok
        where = f" at {t.line}:{t.col}" if t is not None else ""
        if f not in self.domains:
            raise UndeclaredField(f"field {f!r} has no declared domain{where}")
        if v not in self.domains[f]:
            raise ValueOutOfDomain(f"value {v!r} is not in the domain of {f!r}{where}")

    def _name(self, e: _E):
        name = e.args[0]
        if name not in self.bindings:
            t = e.tok
            raise PolicySyntaxError(f"unknown name {name!r}", t.line, t.col)
        return self.bindings[name]

    def pred(self, e: _E) -> Predicate:
        op = e.op
        if op == "1":
            return ONE
        if op == "0":
            return ZERO
        if op == "test":
            self._check(e, *e.args)
            return Test(*e.args)
        if op == "+":
            return Disj(self.pred(e.args[0]), self.pred(e.args[1]))
        if op == ".":
            return Conj(self.pred(e.args[0]), self.pred(e.args[1]))
        if op == "~":
            return Neg(self.pred(e.args[0]))
        if op == "name":
            v = self._name(e)
            if isinstance(v, PREDICATE_TYPES):
                return v
            if isinstance(v, Filter):
                return v.pred
            t = e.tok
            raise PolicySyntaxError(f"{e.args[0]!r} is not a predicate", t.line, t.col)
        t = e.tok
        what = "modification" if op == "mod" else "repetition"
        raise PolicySyntaxError(f"a {what} is not allowed in a predicate", t.line, t.col)

    def policy(self, e: _E) -> Policy:
        op = e.op
        if op in ("1", "0", "test"):
            return Filter(self.pred(e))
        if op == "~":
            return Filter(self.pred(e))
        if op == "mod":
            self._check(e, *e.args)
            return Mod(*e.args)
        if op == "+":
            return Union(self.policy(e.args[0]), self.policy(e.args[1]))
        if op == ".":
            return Seq(self.policy(e.args[0]), self.policy(e.args[1]))
        if op == "^":
            return Rep(self.policy(e.args[0]), e.args[1])
        if op == "name":
            v = self._name(e)
            return Filter(v) if isinstance(v, PREDICATE_TYPES) else v
        raise AssertionError(op)


def _parse_expr(text: str, line: int = 1, col: int = 1) -> _E:
    return _ExprParser(_lex(text, line, col)).parse()


def parse_policy(
    text: str,
    domains: Optional[DomainMap] = None,
    bindings: Optional[Mapping[str, object]] = None,
    *,
    line: int = 1,
    col: int = 1,
) -> Policy:
    """Parse ``text`` as a policy; validate fields and values when ``domains`` is given."""
    return _Resolver(domains, bindings or {}).policy(_parse_expr(text, line, col))


def parse_predicate(
    text: str,
    domains: Optional[DomainMap] = None,
    bindings: Optional[Mapping[str, object]] = None,
    *,
    line: int = 1,
    col: int = 1,
) -> Predicate:
    return _Resolver(domains, bindings or {}).pred(_parse_expr(text, line, col))


# -- problem files ----------------------------------------------------------


@dataclass(frozen=True)
class SafetyProblem:
    ingress: Predicate
    switch_policy: Policy
    topology: Policy
    egress: Predicate
    domains: DomainMap
    unfold_n: Optional[int] = None


_SECTIONS = ("domains", "policy", "topology", "ingress", "egress", "unfold")
_HEAD_RE = re.compile(r"^(domains|policy|topology|ingress|egress|unfold)\s*:")
_LET_RE = re.compile(r"^let\s+([A-Za-z_][A-Za-z0-9_]*)\s*=")
_DOMAIN_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.*)$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_RANGE_RE = re.compile(r"^(\d+)\s*\.\.\s*(\d+)$")


def _parse_domain_values(text: str, lineno: int) -> List[Value]:
    vals: List[Value] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        m = _RANGE_RE.match(part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise PolicySyntaxError(f"empty range {part!r}", lineno, 1)
            vals.extend(range(lo, hi + 1))
        elif part.isdigit():
            vals.append(int(part))
        elif _IDENT_RE.match(part):
            vals.append(part)
        else:
            raise PolicySyntaxError(f"bad domain value {part!r}", lineno, 1)
    if not vals:
        raise PolicySyntaxError("domain must list at least one value", lineno, 1)
    return vals


@dataclass
class _Stmt:
    kind: str  # section name or 'let'
    name: Optional[str]
    text: str
    line: int
    col: int


def _split_statements(contents: str):
    domains: Dict[str, List[Value]] = {}
    stmts: List[_Stmt] = []
    in_domains = False
    saw_domains = False
    for lineno, raw in enumerate(contents.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indented = line[0] in " \t"
        stripped = line.strip()
        m = _HEAD_RE.match(stripped) if not indented else None
        let = _LET_RE.match(stripped) if not indented else None
        if m:
            kind = m.group(1)
            rest = stripped[m.end():]
            col = len(line) - len(line.lstrip()) + m.end() + 1
            in_domains = kind == "domains"
            if in_domains:
                saw_domains = True
                if rest.strip():
                    raise PolicySyntaxError("domain entries go on their own lines", lineno, col)
                continue
            if any(s.kind == kind for s in stmts):
                raise PolicySyntaxError(f"duplicate section {kind!r}", lineno, 1)
            stmts.append(_Stmt(kind, None, rest, lineno, col))
        elif let:
            in_domains = False
            col = len(line) - len(line.lstrip()) + let.end() + 1
            stmts.append(_Stmt("let", let.group(1), stripped[let.end():], lineno, col))
        elif in_domains:
            dm = _DOMAIN_RE.match(line)
            if not dm:
                raise PolicySyntaxError("expected 'field: v1, v2, ...'", lineno, 1)
            f = dm.group(1)
            if f in domains:
                raise PolicySyntaxError(f"domain of {f!r} declared twice", lineno, 1)
            domains[f] = _parse_domain_values(dm.group(2), lineno)
        elif indented and stmts:
            stmts[-1].text += "\n" + line
        else:
            raise PolicySyntaxError(f"unexpected line {stripped!r}", lineno, 1)
    return domains, stmts, saw_domains


def parse_problem(contents: str) -> SafetyProblem:
    """Parse and validate a problem file."""
    raw_domains, stmts, saw_domains = _split_statements(contents)
    if not saw_domains:
        raise MissingSection("missing section 'domains:'")
    domains = DomainMap(raw_domains)
    bindings: Dict[str, object] = {}
    sections: Dict[str, object] = {}
    for st in stmts:
        if st.kind == "let":
            e = _parse_expr(st.text, st.line, st.col)
            res = _Resolver(domains, bindings)
            try:
                bindings[st.name] = res.pred(e)
            except PolicySyntaxError:
                bindings[st.name] = res.policy(e)
        elif st.kind in ("ingress", "egress"):
            sections[st.kind] = parse_predicate(st.text, domains, bindings, line=st.line, col=st.col)
        elif st.kind in ("policy", "topology"):
            sections[st.kind] = parse_policy(st.text, domains, bindings, line=st.line, col=st.col)
        elif st.kind == "unfold":
            txt = st.text.strip()
            if not txt.isdigit():
                raise PolicySyntaxError(f"unfold expects a natural, got {txt!r}", st.line, st.col)
            sections["unfold"] = int(txt)
    for name in ("policy", "topology", "ingress", "egress"):
        if name not in sections:
            raise MissingSection(f"missing section '{name}:'")
    return SafetyProblem(
        ingress=sections["ingress"],
        switch_policy=sections["policy"],
        topology=sections["topology"],
        egress=sections["egress"],
        domains=domains,
        unfold_n=sections.get("unfold"),
    )


def _format_domain_values(vals) -> str:
    ints = [v for v in vals if isinstance(v, int)]
    if len(ints) == len(vals) and len(vals) > 2 and ints == list(range(ints[0], ints[0] + len(ints))):
        return f"{ints[0]}..{ints[-1]}"
    return ", ".join(str(v) for v in vals)


def format_problem(problem: SafetyProblem, comment: Optional[str] = None) -> str:
    """Serialize a problem back into the file format read by :func:`parse_problem`."""
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append("domains:")
    for f in problem.domains:
        lines.append(f"  {f}: {_format_domain_values(problem.domains[f])}")
    lines.append(f"policy: {pretty(problem.switch_policy)}")
    lines.append(f"topology: {pretty(problem.topology)}")
    lines.append(f"ingress: {pretty(problem.ingress)}")
    lines.append(f"egress: {pretty(problem.egress)}")
    if problem.unfold_n is not None:
        lines.append(f"unfold: {problem.unfold_n}")
    return "\n".join(lines) + "\n"
