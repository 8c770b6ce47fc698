import math
from enum import auto, IntEnum
from typing import Callable, Final

from compatpie.ast import (
    CallExpression,
    EvaluationError,
    ExpressionNode,
    IdentifierExpression,
    InfixExpression,
    NumberLiteralExpression,
    PrefixExpression,
    ValueListNode,
)
from compatpie.errors import ExpressionError
from compatpie.lexer import Lexer
from compatpie.token import Token, TokenType

PrefixParseFn = Callable[[], ExpressionNode | None]
InfixParseFn = Callable[[ExpressionNode], ExpressionNode | None]


class Precedence(IntEnum):
    LOWEST = auto()
    SUM = auto()
    PRODUCT = auto()
    PREFIX = auto()
    POWER = auto()
    CALL = auto()


PRECEDENCES: Final[dict[TokenType, Precedence]] = {
    TokenType.PLUS: Precedence.SUM,
    TokenType.MINUS: Precedence.SUM,
    TokenType.SLASH: Precedence.PRODUCT,
    TokenType.ASTERISK: Precedence.PRODUCT,
    TokenType.CARET: Precedence.POWER,
    TokenType.LPAREN: Precedence.CALL,
}


class Parser:
    current_token: Token = Token(TokenType.ILLEGAL, "")
    peek_token: Token = Token(TokenType.ILLEGAL, "")

    def __init__(self, lexer: Lexer):
        self._lexer = lexer
        self._errors: list[str] = []

        self._prefix_parse_functions: dict[TokenType, PrefixParseFn] = {}
        self._infix_parse_functions: dict[TokenType, InfixParseFn] = {}

        self.register_prefix_parse_function(TokenType.IDENT, self.parse_identifier)
        self.register_prefix_parse_function(
            TokenType.NUMBER, self.parse_number_literal_expression
        )
        self.register_prefix_parse_function(
            TokenType.MINUS, self.parse_prefix_expression
        )
        self.register_prefix_parse_function(TokenType.PLUS, self.parse_prefix_expression)
        self.register_prefix_parse_function(
            TokenType.LPAREN, self.parse_grouped_expression
        )

        for token_type in (
            TokenType.PLUS,
            TokenType.MINUS,
            TokenType.SLASH,
            TokenType.ASTERISK,
            TokenType.CARET,
        ):
            self.register_infix_parse_function(token_type, self.parse_infix_expression)
        self.register_infix_parse_function(TokenType.LPAREN, self.parse_call_expression)

        self.next_token()
        self.next_token()

    def errors(self) -> list[str]:
        return self._errors

    def next_token(self):
        self.current_token = self.peek_token
        self.peek_token = self._lexer.next_token()

    def current_token_is(self, type: TokenType) -> bool:
        return self.current_token.type == type

    def peek_token_is(self, type: TokenType) -> bool:
        return self.peek_token.type == type

    def peek_error(self, type: TokenType):
        self._errors.append(
            f"expected next token to be {type.value}, got {self.peek_token.type.value} "
            f"at position {self.peek_token.position} instead"
        )

    def peek_precedence(self) -> Precedence:
        try:
            return PRECEDENCES[self.peek_token.type]
        except KeyError:
            return Precedence.LOWEST

    def current_precedence(self) -> Precedence:
        try:
            return PRECEDENCES[self.current_token.type]
        except KeyError:
            return Precedence.LOWEST

    def expect_peek(self, type: TokenType) -> bool:
        if self.peek_token_is(type):
            self.next_token()
            return True
        self.peek_error(type)
        return False

    def register_prefix_parse_function(
        self, token_type: TokenType, prefix_parse_function: PrefixParseFn
    ) -> None:
        self._prefix_parse_functions[token_type] = prefix_parse_function

    def register_infix_parse_function(
        self, token_type: TokenType, infix_parse_function: InfixParseFn
    ) -> None:
        self._infix_parse_functions[token_type] = infix_parse_function

    def parse_values(self) -> ValueListNode:
        values = ValueListNode()
        if self.current_token_is(TokenType.EOF):
            self._errors.append("expected at least one value, got nothing")
            return values

        while True:
            expression = self.parse_expression(Precedence.LOWEST)
            if expression is None:
                return values
            values.values.append(expression)
            if self.peek_token_is(TokenType.EOF):
                return values
            if not self.expect_peek(TokenType.COMMA):
                return values
            self.next_token()

    def parse_expression(self, precedence: Precedence) -> ExpressionNode | None:
        try:
            prefix = self._prefix_parse_functions[self.current_token.type]
        except KeyError:
            self._errors.append(
                f"no prefix parse function for {self.current_token.type.value} "
                f"at position {self.current_token.position}"
            )
            return None

        left = prefix()
        if not left:
            return None
        while (
            not self.peek_token_is(TokenType.COMMA)
            and precedence < self.peek_precedence()
        ):
            try:
                infix = self._infix_parse_functions[self.peek_token.type]
            except KeyError:
                return left
            self.next_token()
            right = infix(left)
            if right is None:
                return None
            left = right

        return left

    def parse_identifier(self) -> ExpressionNode:
        return IdentifierExpression(self.current_token, self.current_token.literal)

    def parse_number_literal_expression(self) -> ExpressionNode | None:
        literal = NumberLiteralExpression(self.current_token)
        try:
            literal.value = float(self.current_token.literal)
            return literal
        except ValueError:
            self._errors.append(
                f"could not parse {self.current_token.literal} as number"
            )
            return None

    def parse_prefix_expression(self) -> ExpressionNode | None:
        expression = PrefixExpression(self.current_token, self.current_token.literal)
        self.next_token()
        expression.right = self.parse_expression(Precedence.PREFIX)
        if expression.right is None:
            return None
        return expression

    def parse_infix_expression(self, left: ExpressionNode) -> ExpressionNode | None:
        expression = InfixExpression(
            self.current_token, left, self.current_token.literal
        )
        precedence = self.current_precedence()
        # right-associative exponentiation
        if self.current_token_is(TokenType.CARET):
            precedence = Precedence(precedence - 1)
        self.next_token()
        expression.right = self.parse_expression(precedence)
        if expression.right is None:
            return None
        return expression

    def parse_grouped_expression(self) -> ExpressionNode | None:
        self.next_token()
        expression = self.parse_expression(Precedence.LOWEST)
        if not self.expect_peek(TokenType.RPAREN):
            return None
        return expression

    def parse_call_expression(self, function: ExpressionNode) -> ExpressionNode | None:
        if not isinstance(function, IdentifierExpression):
            self._errors.append(f"{function} is not callable")
            return None
        expression = CallExpression(self.current_token, function)
        self.next_token()
        expression.argument = self.parse_expression(Precedence.LOWEST)
        if expression.argument is None or not self.expect_peek(TokenType.RPAREN):
            return None
        return expression


def parse(text: str) -> ValueListNode:
    parser = Parser(Lexer(text))
    values = parser.parse_values()
    if len(errors := parser.errors()):
        raise ExpressionError(text, errors)
    return values


def evaluate_values(text: str) -> list[float]:
    """Evaluate a comma-separated list of arithmetic expressions."""
    values = parse(text)
    try:
        result = values.evaluate()
    except EvaluationError as e:
        raise ExpressionError(text, [str(e)])
    if any(math.isnan(v) for v in result):
        raise ExpressionError(text, ["expression is not a number"])
    return result


def evaluate_value(text: str) -> float:
    values = evaluate_values(text)
    if len(values) != 1:
        raise ExpressionError(text, [f"expected one value, got {len(values)}"])
    return values[0]


def evaluate_counts(text: str, expected: int | None = None) -> list[int]:
    values = evaluate_values(text)
    if expected is not None and len(values) != expected:
        raise ExpressionError(text, [f"expected {expected} values, got {len(values)}"])
    counts = []
    for v in values:
        if not math.isfinite(v) or v != int(v):
            raise ExpressionError(text, [f"{v} is not a whole count"])
        counts.append(int(v))
    return counts
