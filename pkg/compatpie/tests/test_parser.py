import math
import unittest

from parameterized import parameterized

from compatpie.errors import ExpressionError
from compatpie.lexer import Lexer
from compatpie.parser import (
    Parser,
    evaluate_counts,
    evaluate_value,
    evaluate_values,
    parse,
)


class ParserTestCase(unittest.TestCase):
    def check_parser_errors(self, parser: Parser) -> None:
        errors = parser.errors()
        if len(errors) == 0:
            return
        self.assertEqual(
            0, len(errors), "\n".join([f"parser error: {e}" for e in errors])
        )


class TestOperatorPrecedence(ParserTestCase):
    @parameterized.expand(
        [
            ("-a * b", "((-a) * b)"),
            ("a + b * c", "(a + (b * c))"),
            ("a + b - c", "((a + b) - c)"),
            ("a * b / c", "((a * b) / c)"),
            ("a ^ b ^ c", "(a ^ (b ^ c))"),
            ("-a ^ b", "(-(a ^ b))"),
            ("a * b ^ c", "(a * (b ^ c))"),
            ("(a + b) * c", "((a + b) * c)"),
            ("1 / 1.20", "(1 / 1.20)"),
            ("exp(a + b) * c", "(exp((a + b)) * c)"),
            ("a, b + c", "a, (b + c)"),
        ]
    )
    def test_operator_precedence_parsing(self, text: str, expected: str):
        parser = Parser(Lexer(text))
        values = parser.parse_values()
        self.check_parser_errors(parser)

        self.assertEqual(expected, str(values))


class TestParserErrors(ParserTestCase):
    @parameterized.expand(
        [
            ("",),
            ("1 +",),
            ("(1 + 2",),
            ("1 2",),
            ("3,",),
            ("$",),
            ("2(3)",),
        ]
    )
    def test_parser_errors(self, text: str):
        parser = Parser(Lexer(text))
        parser.parse_values()

        self.assertNotEqual(0, len(parser.errors()))

    def test_parse_raises_expression_error(self):
        with self.assertRaises(ExpressionError) as raised:
            parse("(1 + 2")

        self.assertEqual("(1 + 2", raised.exception.text)
        self.assertEqual(1, len(raised.exception.errors))


class TestEvaluate(unittest.TestCase):
    @parameterized.expand(
        [
            ("1/1.20", 1 / 1.2),
            ("2^3^2", 512.0),
            ("-2^2", -4.0),
            ("(-2)^2", 4.0),
            ("(-2)^3", -8.0),
            ("exp(log(2.5))", 2.5),
            ("sqrt(16) + 1", 5.0),
            ("+3", 3.0),
            ("1e-3 * 2", 0.002),
            ("2 * pi", 2 * math.pi),
        ]
    )
    def test_evaluate_value(self, text: str, expected: float):
        self.assertAlmostEqual(expected, evaluate_value(text), places=12)

    def test_infinity_constant(self):
        self.assertEqual(math.inf, evaluate_value("inf"))

    def test_evaluate_values(self):
        self.assertEqual([0.5, 1.0, 2.0, 4.0], evaluate_values("0.5, 1, 2, 2*2"))

    def test_evaluate_counts(self):
        self.assertEqual([10, 110, 16, 464], evaluate_counts("10, 110, 16, 464", 4))

    @parameterized.expand(
        [
            ("1/0",),
            ("log(0)",),
            ("sqrt(-1)",),
            ("unknown",),
            ("foo(1)",),
            ("inf - inf",),
            ("(-8)^0.5",),
            ("(-8)^(1/3)",),
        ]
    )
    def test_evaluation_errors(self, text: str):
        with self.assertRaises(ExpressionError):
            evaluate_value(text)

    @parameterized.expand(
        [
            ("1, 2", 1),
            ("1, 2, 3", 4),
            ("1.5, 2, 3, 4", 4),
            ("inf, 1, 1, 1", 4),
        ]
    )
    def test_count_errors(self, text: str, expected: int):
        with self.assertRaises(ExpressionError):
            evaluate_counts(text, expected)

    def test_value_count_mismatch(self):
        with self.assertRaises(ExpressionError):
            evaluate_value("1, 2")
