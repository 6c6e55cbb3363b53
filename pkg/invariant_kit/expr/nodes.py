"""Expression tree nodes and the canonical printer."""

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Node", ...]


Node = Union[Num, Var, Neg, BinOp, Call]


def to_source(node: Node) -> str:
    """Print a node as fully parenthesised source that parses back to the same tree."""
    if isinstance(node, Num):
        text = repr(float(node.value))
        return text if node.value >= 0 else f"({text})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(arg) for arg in node.args)})"
    raise TypeError(f"Not an expression node: {node!r}")


def variables_used(node: Node) -> frozenset[str]:
    """Names of the variables that actually occur in the tree."""
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Neg):
        return variables_used(node.operand)
    if isinstance(node, BinOp):
        return variables_used(node.left) | variables_used(node.right)
    if isinstance(node, Call):
        names: frozenset[str] = frozenset()
        for arg in node.args:
            names |= variables_used(arg)
        return names
    return frozenset()
