"""Coin-angle field θ(j, p): builtin families and a small expression language.

Expressions are written in the physical coordinates t = eps*j and x = eps*p,
so one source serves every lattice spacing of a convergence sweep. Angles are
radians.

Grammar (precedence ^ > unary minus > * / > + -):

    expr   :: term (('+' | '-') term)*
    term   :: factor (('*' | '/') factor)*
    factor :: base ('^' factor)?
    base   :: number | 't' | 'x' | ident '(' expr (',' expr)* ')'
            | '(' expr ')' | '-' factor
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Optional, Tuple, Union

import numpy as np
import pyparsing as pp

from .errors import FieldRangeError, ThetaDomainError, ThetaParseError
from .lattice import Field, Lattice, scalar_field, wrap_p

logger = logging.getLogger(__name__)

FUNCTIONS: Dict[str, Callable] = {
    'sin': np.sin,
    'cos': np.cos,
    'tan': np.tan,
    'exp': np.exp,
    'log': np.log,
    'sinh': np.sinh,
    'cosh': np.cosh,
    'tanh': np.tanh,
    'arccos': np.arccos,
    'arcsin': np.arcsin,
    'arctan': np.arctan,
    'sqrt': np.sqrt,
    'abs': np.abs,
}
BINARY_OPS: Dict[str, Callable] = {
    '+': np.add,
    '-': np.subtract,
    '*': np.multiply,
    '/': np.true_divide,
    '^': np.power,
}
VARIABLES = ('t', 'x')

OPERAND_TOKENS = frozenset({'number', 't', 'x', 'function', '(', '-'})
OPERATOR_TOKENS = frozenset({'+', '-', '*', '/', '^', 'end of input'})

Number = Union[float, np.ndarray]


@dataclass(frozen=True)
class ExprNode:
    """One node of a parsed expression.

    tag is 'num', 'var', 'neg', 'call' or one of the binary operators.
    """
    tag: str
    children: Tuple['ExprNode', ...] = ()
    value: Optional[float] = None
    name: Optional[str] = None

    def variables(self) -> FrozenSet[str]:
        if self.tag == 'var':
            return frozenset({self.name})
        found = frozenset()
        for child in self.children:
            found |= child.variables()
        return found


@dataclass(frozen=True)
class ThetaSpec:
    kind: str  # 'constant' | 'time_profile' | 'full'
    tree: ExprNode
    source: str

    @property
    def value(self) -> Optional[float]:
        if self.kind != 'constant':
            return None
        return float(evaluate(self.tree, 0.0, 0.0))


# --- grammar ---

def _fold_left(tokens):
    items = list(tokens)
    node = items[0]
    for op, rhs in zip(items[1::2], items[2::2]):
        node = ExprNode(tag=op, children=(node, rhs))
    return node


def _power(tokens):
    items = list(tokens)
    if len(items) == 1:
        return items[0]
    return ExprNode(tag='^', children=(items[0], items[2]))


def _number(tokens):
    return ExprNode(tag='num', value=float(tokens[0]))


def _variable(s, loc, tokens):
    name = tokens[0]
    if name not in VARIABLES:
        raise pp.ParseFatalException(s, loc, f"unknown identifier '{name}'")
    return ExprNode(tag='var', name=name)


def _call(s, loc, tokens):
    name, args = tokens[0], tuple(tokens[1])
    if name not in FUNCTIONS:
        raise pp.ParseFatalException(s, loc, f"unknown function '{name}'")
    if len(args) != 1:
        raise pp.ParseFatalException(s, loc, f"arity mismatch: '{name}' takes 1 argument, got {len(args)}")
    return ExprNode(tag='call', children=args, name=name)


def _negate(tokens):
    return ExprNode(tag='neg', children=(tokens[1],))


def _build_grammar() -> pp.ParserElement:
    lpar, rpar = pp.Suppress('('), pp.Suppress(')')
    number = pp.Regex(r'(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?').set_name('number')
    ident = pp.Word(pp.alphas + '_', pp.alphanums + '_').set_name('identifier')

    expr = pp.Forward().set_name('expression')
    factor = pp.Forward().set_name('operand')

    call = (ident + lpar - pp.Group(pp.DelimitedList(expr)) + rpar).set_parse_action(_call)
    variable = (~(ident + lpar) + ident).set_parse_action(_variable)
    paren = lpar - expr + rpar
    negation = (pp.Literal('-') - factor).set_parse_action(_negate)
    base = (number.copy().set_parse_action(_number) | call | variable | paren | negation).set_name('operand')

    factor <<= (base + pp.Optional(pp.Literal('^') - factor)).set_parse_action(_power)
    term = (factor + pp.ZeroOrMore(pp.one_of('* /') - factor)).set_parse_action(_fold_left)
    expr <<= (term + pp.ZeroOrMore(pp.one_of('+ -') - term)).set_parse_action(_fold_left)
    return expr


_GRAMMAR = _build_grammar()


def _expected_from(msg: str) -> FrozenSet[str]:
    name = msg[len('Expected '):] if msg.startswith('Expected ') else msg
    if name == 'operand':
        return OPERAND_TOKENS
    if name in ('end of text', 'StringEnd'):
        return OPERATOR_TOKENS
    return frozenset({name.strip("'")})


def _kind_from(msg: str) -> str:
    if msg.startswith('unknown'):
        return 'unknown_identifier'
    if msg.startswith('arity'):
        return 'arity'
    return 'syntax'


def parse_expression(src: str) -> ExprNode:
    try:
        return _GRAMMAR.parse_string(src, parse_all=True)[0]
    except pp.ParseBaseException as exc:
        msg = exc.msg or 'syntax error'
        kind = _kind_from(msg)
        if kind != 'syntax':
            raise ThetaParseError(msg, offset=exc.loc, kind=kind) from None
        raise ThetaParseError('syntax error', offset=exc.loc, expected=_expected_from(msg)) from None


def parse_theta(src: str) -> ThetaSpec:
    """Parse a θ expression and classify it by the coordinates it uses."""
    tree = parse_expression(src)
    used = tree.variables()
    if 'x' in used:
        kind = 'full'
    elif 't' in used:
        kind = 'time_profile'
    else:
        kind = 'constant'
    logger.debug("parsed theta %r as %s", src, kind)
    return ThetaSpec(kind=kind, tree=tree, source=src)


def pretty_print(node: ExprNode) -> str:
    """Fully parenthesized source text that parses back to `node`."""
    if node.tag == 'num':
        return repr(float(node.value))
    if node.tag == 'var':
        return node.name
    if node.tag == 'neg':
        return f"(-{pretty_print(node.children[0])})"
    if node.tag == 'call':
        return f"{node.name}({', '.join(pretty_print(c) for c in node.children)})"
    left, right = node.children
    return f"({pretty_print(left)} {node.tag} {pretty_print(right)})"


# --- evaluation ---

def evaluate(node: ExprNode, t: Number, x: Number) -> Number:
    """Evaluate a tree at (t, x); arrays broadcast. Non-finite results are returned as is."""
    with np.errstate(all='ignore'):
        return _evaluate(node, t, x)


def _evaluate(node: ExprNode, t, x):
    if node.tag == 'num':
        return node.value
    if node.tag == 'var':
        return t if node.name == 't' else x
    if node.tag == 'neg':
        return np.negative(_evaluate(node.children[0], t, x))
    if node.tag == 'call':
        return FUNCTIONS[node.name](_evaluate(node.children[0], t, x))
    left, right = (_evaluate(c, t, x) for c in node.children)
    return BINARY_OPS[node.tag](left, right)


def eval_theta(spec: ThetaSpec, lat: Lattice, j: int, p: int) -> float:
    """θ_{j,p} in radians; p is wrapped, j must be a stored slice."""
    if not 0 <= j < lat.J:
        raise FieldRangeError(f"slice j={j} outside [0, {lat.J})")
    p = wrap_p(p, lat.P)
    value = float(np.real(evaluate(spec.tree, lat.eps * j, lat.eps * p)))
    if not np.isfinite(value):
        raise ThetaDomainError(f"theta '{spec.source}' is not finite", site=(j, p))
    return value


def theta_slice(spec: ThetaSpec, lat: Lattice, j: int) -> np.ndarray:
    """θ_{j,p} for every p of one slice."""
    if not 0 <= j < lat.J:
        raise FieldRangeError(f"slice j={j} outside [0, {lat.J})")
    values = np.broadcast_to(np.asarray(evaluate(spec.tree, lat.eps * j, lat.x), dtype=float), (lat.P,))
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ThetaDomainError(f"theta '{spec.source}' is not finite", site=(j, bad[0]))
    return np.array(values)


def theta_field(spec: ThetaSpec, lat: Lattice) -> Field:
    """Evaluate θ on every lattice site."""
    t = lat.t[:, None]
    x = lat.x[None, :]
    values = np.broadcast_to(np.asarray(evaluate(spec.tree, t, x), dtype=float), lat.shape)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        raise ThetaDomainError(f"theta '{spec.source}' is not finite", site=tuple(bad[0]))
    return scalar_field(lat, np.array(values))


# --- builtin families ---

def _constant(value: float = 0.0) -> str:
    return repr(float(value))


def _sinusoidal_scale(amplitude: float = 0.1, omega: float = 1.0) -> str:
    return f"arccos(1/(1+{float(amplitude)!r}*sin({float(omega)!r}*t)))"


def _scale_factor(expression: str = '1') -> str:
    return f"arccos(1/({expression}))"


def _de_sitter() -> str:
    return 'arccos(1/cosh(t))'


FAMILIES: Dict[str, Callable[..., str]] = {
    'constant': _constant,
    'sinusoidal_scale': _sinusoidal_scale,
    'scale_factor': _scale_factor,
    'de_sitter': _de_sitter,
}


def builtin_theta(family: str, **params) -> ThetaSpec:
    """Build a θ spec from a named family, e.g. sinusoidal_scale(amplitude, omega)."""
    if family not in FAMILIES:
        raise ValueError(f"unknown theta family '{family}' (known: {', '.join(sorted(FAMILIES))})")
    return parse_theta(FAMILIES[family](**params))
