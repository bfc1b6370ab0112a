# -*- coding: utf-8 -*-
"""
蕴含求值

对每条规则，用回溯把正文字逐个与事实库合一，得到所有替换；
再检查否定文字 (失败即否定)，满足的替换实例化规则头。
"""
from typing import Dict, Iterator, Optional, Set

from app.logic.parser import HornRule, SymbolicPolicy
from app.logic.terms import Atom, FactBase, is_variable

Substitution = Dict[str, str]


def unify(pattern: Atom, fact: Atom, subst: Substitution) -> Optional[Substitution]:
    """把带变量的 pattern 与基原子 fact 合一，失败返回 None"""
    if pattern.predicate != fact.predicate or len(pattern.args) != len(fact.args):
        return None
    result = dict(subst)
    for term, value in zip(pattern.args, fact.args):
        if is_variable(term):
            bound = result.get(term)
            if bound is None:
                result[term] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    return result


def substitute(atom: Atom, subst: Substitution) -> Atom:
    return Atom(atom.predicate, tuple(subst.get(arg, arg) if is_variable(arg) else arg for arg in atom.args))


def _solve(positive, facts: FactBase, subst: Substitution, index: int = 0) -> Iterator[Substitution]:
    if index == len(positive):
        yield subst
        return
    pattern = positive[index]
    for fact in facts.with_predicate(pattern.predicate):
        extended = unify(pattern, fact, subst)
        if extended is not None:
            yield from _solve(positive, facts, extended, index + 1)


def rule_heads(rule: HornRule, facts: FactBase) -> Set[Atom]:
    heads = set()
    for subst in _solve(rule.positive, facts, {}):
        if any(substitute(atom, subst) in facts for atom in rule.negative):
            continue
        heads.add(substitute(rule.head, subst))
    return heads


def entailed_heads(policy: SymbolicPolicy, facts: FactBase) -> Set[Atom]:
    """所有规则的蕴含头的并集"""
    heads: Set[Atom] = set()
    for rule in policy.rules:
        heads |= rule_heads(rule, facts)
    return heads
