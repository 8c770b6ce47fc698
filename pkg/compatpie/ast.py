from abc import ABCMeta, abstractmethod

from compatpie.token import CONSTANTS, FUNCTIONS, Token, TokenType


class EvaluationError(ArithmeticError):
    pass


class Node(metaclass=ABCMeta):
    @abstractmethod
    def token_literal(self) -> str:
        raise NotImplementedError

    @abstractmethod
    def __str__(self) -> str:
        return ""


class ExpressionNode(Node, metaclass=ABCMeta):
    def __init__(self, token: Token = Token(TokenType.ILLEGAL, "")):
        self.token = token

    def token_literal(self) -> str:
        return self.token.literal

    @abstractmethod
    def evaluate(self) -> float:
        raise NotImplementedError


class ValueListNode(Node):
    def __init__(self) -> None:
        self.values: list[ExpressionNode] = []

    def token_literal(self) -> str:
        return self.values[0].token_literal() if self.values else ""

    def __str__(self) -> str:
        return ", ".join(str(v) for v in self.values)

    def evaluate(self) -> list[float]:
        return [v.evaluate() for v in self.values]


class NumberLiteralExpression(ExpressionNode):
    def __init__(self, token=Token(TokenType.ILLEGAL, ""), value: float = 0.0):
        super().__init__(token)
        self.value = value

    def __str__(self) -> str:
        return self.token.literal

    def evaluate(self) -> float:
        return self.value


class IdentifierExpression(ExpressionNode):
    def __init__(self, token=Token(TokenType.ILLEGAL, ""), value: str = ""):
        super().__init__(token)
        self.value = value

    def __str__(self) -> str:
        return self.value

    def evaluate(self) -> float:
        try:
            return CONSTANTS[self.value]
        except KeyError:
            raise EvaluationError(f"unknown name {self.value}")


class PrefixExpression(ExpressionNode):
    def __init__(
        self,
        token=Token(TokenType.ILLEGAL, ""),
        operator: str = "",
        right: ExpressionNode | None = None,
    ):
        super().__init__(token)
        self.operator = operator
        self.right = right

    def __str__(self) -> str:
        return f"({self.operator}{str(self.right)})"

    def evaluate(self) -> float:
        if self.right is None:
            raise EvaluationError(f"missing operand for {self.operator}")
        value = self.right.evaluate()
        return -value if self.operator == "-" else value


class InfixExpression(ExpressionNode):
    def __init__(
        self,
        token=Token(TokenType.ILLEGAL, ""),
        left: ExpressionNode | None = None,
        operator: str = "",
        right: ExpressionNode | None = None,
    ):
        super().__init__(token)
        self.left = left
        self.operator = operator
        self.right = right

    def __str__(self) -> str:
        return f"({str(self.left)} {self.operator} {str(self.right)})"

    def evaluate(self) -> float:
        if self.left is None or self.right is None:
            raise EvaluationError(f"missing operand for {self.operator}")
        left, right = self.left.evaluate(), self.right.evaluate()
        match self.operator:
            case "+":
                return left + right
            case "-":
                return left - right
            case "*":
                return left * right
            case "/":
                if right == 0:
                    raise EvaluationError(f"division by zero in {self}")
                return left / right
            case "^":
                if left < 0 and not float(right).is_integer():
                    raise EvaluationError(f"negative base with fractional exponent in {self}")
                try:
                    return float(left**right)
                except (OverflowError, ZeroDivisionError) as e:
                    raise EvaluationError(f"{e} in {self}")
        raise EvaluationError(f"unknown operator {self.operator}")


class CallExpression(ExpressionNode):
    def __init__(
        self,
        token: Token = Token(TokenType.ILLEGAL, ""),
        function: IdentifierExpression | None = None,
        argument: ExpressionNode | None = None,
    ):
        super().__init__(token)
        self.function = function
        self.argument = argument

    def __str__(self) -> str:
        return f"{str(self.function)}({str(self.argument)})"

    def evaluate(self) -> float:
        if self.function is None or self.argument is None:
            raise EvaluationError("incomplete call")
        try:
            function = FUNCTIONS[self.function.value]
        except KeyError:
            raise EvaluationError(f"unknown function {self.function.value}")
        try:
            return function(self.argument.evaluate())
        except (ValueError, OverflowError) as e:
            raise EvaluationError(f"{e} in {self}")
