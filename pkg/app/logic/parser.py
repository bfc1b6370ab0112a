# -*- coding: utf-8 -*-
"""
Horn 规则解析器

语法 (Prolog 风格):
    rule    := atom [ (":-" | "<-" | "←") literal { "," literal } ] "."
    literal := [ "not" ] atom
    atom    := IDENT [ "(" term { "," term } ")" ]
"%" 到行尾是注释；参数中大写或下划线开头的是变量，其余是常量。
"""
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Set, Tuple

from app.errors import RuleSyntaxError, UnboundVariableError, UnknownPredicateError
from app.logic.terms import Atom, is_variable

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>%[^\n]*)"
    r"|(?P<arrow>:-|<-|←)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*|[0-9]+)"
    r"|(?P<punct>[(),.])"
)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


class Literal(NamedTuple):
    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return f"not {self.atom}" if self.negated else str(self.atom)


@dataclass(frozen=True)
class HornRule:
    """head :- body；body 中的否定文字按失败即否定求值"""
    head: Atom
    body: Tuple[Literal, ...] = ()

    @property
    def positive(self) -> Tuple[Atom, ...]:
        return tuple(lit.atom for lit in self.body if not lit.negated)

    @property
    def negative(self) -> Tuple[Atom, ...]:
        return tuple(lit.atom for lit in self.body if lit.negated)

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(lit) for lit in self.body)}."


@dataclass(frozen=True)
class SymbolicPolicy:
    rules: Tuple[HornRule, ...]
    source: str = "<string>"

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicPolicy):
            return NotImplemented
        return self.rules == other.rules

    def __hash__(self) -> int:
        return hash(self.rules)


@dataclass(frozen=True)
class Vocabulary:
    """领域词表: 谓词 → 元数"""
    facts: Dict[str, int] = field(default_factory=dict)
    actions: Dict[str, int] = field(default_factory=dict)


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if match is None:
            raise RuleSyntaxError(f"无法识别的字符 {text[pos]!r}", line, column)
        kind = match.lastgroup
        chunk = match.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind if kind != "punct" else chunk, chunk, line, column))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _expect(self, *kinds: str) -> Token:
        token = self.current
        if token.kind not in kinds:
            found = token.text or "文件结尾"
            raise RuleSyntaxError(f"意外的 {found!r}", token.line, token.column, kinds)
        self.index += 1
        return token

    def program(self) -> List[HornRule]:
        rules = []
        while self.current.kind != "eof":
            rules.append(self.rule())
        return rules

    def rule(self) -> HornRule:
        head = self.atom()
        body: List[Literal] = []
        if self.current.kind == "arrow":
            self.index += 1
            body.append(self.literal())
            while self.current.kind == ",":
                self.index += 1
                body.append(self.literal())
        if self.current.kind != ".":
            token = self.current
            expected = (",", ".") if body else (":-", ".")
            raise RuleSyntaxError(f"意外的 {token.text or '文件结尾'!r}", token.line, token.column, expected)
        self.index += 1
        return HornRule(head, tuple(body))

    def literal(self) -> Literal:
        token = self.current
        if token.kind == "ident" and token.text == "not" and self.tokens[self.index + 1].kind == "ident":
            self.index += 1
            return Literal(self.atom(), negated=True)
        return Literal(self.atom())

    def atom(self) -> Atom:
        name = self._expect("ident")
        args: List[str] = []
        if self.current.kind == "(":
            self.index += 1
            args.append(self._expect("ident").text)
            while self.current.kind == ",":
                self.index += 1
                args.append(self._expect("ident").text)
            self._expect(")", ",")
        return Atom(name.text, tuple(args))


def _variables(atoms) -> Set[str]:
    return {arg for atom in atoms for arg in atom.args if is_variable(arg)}


def validate_rule(rule: HornRule, vocabulary: Optional[Vocabulary] = None):
    """检查词表和变量绑定 (头变量、否定文字变量都必须出现在正文字中)"""
    if vocabulary is not None:
        arity = vocabulary.actions.get(rule.head.predicate)
        if arity is None:
            raise UnknownPredicateError(f"规则头 {rule.head} 的谓词不在动作词表中")
        if arity != len(rule.head.args):
            raise UnknownPredicateError(f"规则头 {rule.head} 的元数应为 {arity}")
        for literal in rule.body:
            arity = vocabulary.facts.get(literal.atom.predicate)
            if arity is None:
                raise UnknownPredicateError(f"文字 {literal} 的谓词不在事实词表中")
            if arity != len(literal.atom.args):
                raise UnknownPredicateError(f"文字 {literal} 的元数应为 {arity}")
    bound = _variables(rule.positive)
    for var in sorted(_variables([rule.head]) - bound):
        raise UnboundVariableError(f"规则 {rule} 中头变量 {var} 没有被正文字绑定")
    for var in sorted(_variables(rule.negative) - bound):
        raise UnboundVariableError(f"规则 {rule} 中否定文字的变量 {var} 没有被正文字绑定")


def parse_rules(text: str, vocabulary: Optional[Vocabulary] = None, source: str = "<string>") -> SymbolicPolicy:
    """
    解析规则文本

    Raises:
        RuleSyntaxError: 语法错误 (带行列和期望 token)
        UnknownPredicateError: 谓词不在词表中
        UnboundVariableError: 变量未绑定
    """
    rules = _Parser(tokenize(text)).program()
    for rule in rules:
        validate_rule(rule, vocabulary)
    return SymbolicPolicy(tuple(rules), source)


def load_rules(path, vocabulary: Optional[Vocabulary] = None) -> SymbolicPolicy:
    path = Path(path)
    return parse_rules(path.read_text(encoding="utf-8"), vocabulary, source=str(path))


def format_rules(policy: SymbolicPolicy) -> str:
    return "\n".join(str(rule) for rule in policy.rules) + ("\n" if policy.rules else "")
