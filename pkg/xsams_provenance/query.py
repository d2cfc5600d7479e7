"""
The restrictable-keyword query subset used by the federation portal.

Grammar (keywords case-insensitive)::

    query       := "select" "*" "where" conjunction
    conjunction := term ("AND" term)*
    term        := "(" conjunction ")" | comparison
    comparison  := keyword ("=" | ">=" | "<=") (string | number)

Parentheses only group; the AST is the flat list of comparisons.
"""

import enum
import logging
import re
from decimal import Decimal, InvalidOperation
from typing import Any, List, Mapping, Tuple, Union

from parsy import ParseError, forward_declaration, from_enum, regex, seq, string
from pydantic import BaseModel, ConfigDict, Field

from .errors import QuerySyntax, TypeMismatch

logger = logging.getLogger(__name__)


class Operator(enum.Enum):
    EQ = "="
    GE = ">="
    LE = "<="


class Comparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    keyword: str
    operator: Operator
    value: Union[str, Decimal]


class QueryAst(BaseModel):
    """A conjunction of comparisons over restrictable keywords."""

    model_config = ConfigDict(frozen=True)

    constraints: Tuple[Comparison, ...] = Field(..., min_length=1)


# -- Parsers

padding = regex(r"\s*")


def lexeme(parser):
    return parser << padding


def keyword(word: str):
    return lexeme(regex(rf"{word}\b", flags=re.IGNORECASE)).desc(word)


identifier = lexeme(regex(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*")).desc("keyword")
number_literal = lexeme(regex(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")).map(Decimal).desc("number")
string_literal = (
    lexeme(regex(r"'((?:[^']|'')*)'", group=1)).map(lambda s: s.replace("''", "'")).desc("string")
)
operator = lexeme(from_enum(Operator)).desc("operator")
lparen = lexeme(string("(")).desc("(")
rparen = lexeme(string(")")).desc(")")

comparison = seq(identifier, operator, string_literal | number_literal).combine(
    lambda k, op, v: Comparison(keyword=k, operator=op, value=v)
)

conjunction = forward_declaration()
term = (lparen >> conjunction << rparen) | comparison.map(lambda c: [c])
conjunction.become(
    seq(term, (keyword("AND") >> term).many()).combine(
        lambda first, rest: first + [c for group in rest for c in group]
    )
)

select = (
    padding
    >> keyword("select")
    >> lexeme(string("*")).desc("*")
    >> keyword("where")
    >> conjunction
).map(lambda constraints: QueryAst(constraints=tuple(constraints)))


def parse_query(text: str) -> QueryAst:
    """Parse query text into a QueryAst.

    Raises:
        QuerySyntax: with the failing offset and the expected tokens
    """
    try:
        return select.parse(text)
    except ParseError as e:
        raise QuerySyntax(e.index, e.expected) from e


def _render_value(value: Union[str, Decimal]) -> str:
    if isinstance(value, Decimal):
        return str(value).replace("E+", "E")
    return "'" + value.replace("'", "''") + "'"


def render(ast: QueryAst) -> str:
    """Canonical text: one pair of double parentheses per comparison."""
    terms = [f"(({c.keyword} {c.operator.value} {_render_value(c.value)}))" for c in ast.constraints]
    return "select * where " + " AND ".join(terms)


def canonicalize(text: str) -> str:
    return render(parse_query(text))


def _as_decimal(value: Any) -> Union[Decimal, None]:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return Decimal(repr(value)) if isinstance(value, float) else Decimal(value)
    try:
        return Decimal(str(value).strip())
    except InvalidOperation:
        return None


def _holds(constraint: Comparison, record: Mapping[str, Any]) -> bool:
    if record.get(constraint.keyword) is None:
        return False
    actual = record[constraint.keyword]
    expected = constraint.value

    if isinstance(expected, str):
        if constraint.operator is not Operator.EQ:
            raise TypeMismatch(constraint.keyword)
        return str(actual).strip().casefold() == expected.casefold()

    number = _as_decimal(actual)
    if number is None:
        if constraint.operator is Operator.EQ:
            return False
        raise TypeMismatch(constraint.keyword, f"ordering comparison against text {actual!r}")
    if constraint.operator is Operator.EQ:
        return number == expected
    if constraint.operator is Operator.GE:
        return number >= expected
    return number <= expected


def evaluate(ast: QueryAst, record: Mapping[str, Any]) -> bool:
    """True iff every comparison holds on ``record``; absent keywords never hold."""
    results: List[bool] = [_holds(c, record) for c in ast.constraints]
    return all(results)
