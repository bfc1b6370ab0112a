# -*- coding: utf-8 -*-
"""
逻辑项: 原子与事实库
"""
from typing import Dict, FrozenSet, Iterable, Iterator, NamedTuple, Tuple


class Atom(NamedTuple):
    """原子 predicate(args...)；参数是常量或变量名"""
    predicate: str
    args: Tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(self.args)})"


def is_variable(term: str) -> bool:
    """大写或下划线开头的是变量"""
    return bool(term) and (term[0].isupper() or term[0] == "_")


class FactBase:
    """不可变的基原子集合，按谓词建索引"""

    __slots__ = ("_atoms", "_index")

    def __init__(self, atoms: Iterable[Atom] = ()):
        normalized = []
        for atom in atoms:
            if not isinstance(atom, Atom):
                atom = Atom(atom[0], tuple(atom[1]) if len(atom) > 1 else ())
            if any(is_variable(arg) for arg in atom.args):
                raise ValueError(f"事实中不能包含变量: {atom}")
            normalized.append(atom)
        self._atoms: FrozenSet[Atom] = frozenset(normalized)
        index: Dict[str, list] = {}
        for atom in sorted(self._atoms):
            index.setdefault(atom.predicate, []).append(atom)
        self._index = {key: tuple(value) for key, value in index.items()}

    def with_predicate(self, predicate: str) -> Tuple[Atom, ...]:
        return self._index.get(predicate, ())

    def constants(self) -> FrozenSet[str]:
        return frozenset(arg for atom in self._atoms for arg in atom.args)

    def union(self, other: Iterable[Atom]) -> "FactBase":
        return FactBase(list(self._atoms) + list(other))

    def __contains__(self, atom) -> bool:
        return atom in self._atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(sorted(self._atoms))

    def __len__(self) -> int:
        return len(self._atoms)

    def __eq__(self, other) -> bool:
        if isinstance(other, FactBase):
            return self._atoms == other._atoms
        if isinstance(other, (set, frozenset)):
            return self._atoms == frozenset(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._atoms)

    def __repr__(self) -> str:
        return "FactBase({" + ", ".join(str(atom) for atom in self) + "})"
