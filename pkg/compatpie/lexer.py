from compatpie.token import Token, TokenType

SINGLE_CHARACTER_TOKENS: dict[str, TokenType] = {
    "+": TokenType.PLUS,
    "-": TokenType.MINUS,
    "*": TokenType.ASTERISK,
    "/": TokenType.SLASH,
    "^": TokenType.CARET,
    ",": TokenType.COMMA,
    "(": TokenType.LPAREN,
    ")": TokenType.RPAREN,
}


class Lexer:
    def __init__(self, input_: str):
        self._input: str = input_
        self._position: int = 0
        self._read_position: int = 0
        self._ch: str = ""

        self.read_char()

    @staticmethod
    def is_letter(ch: str) -> bool:
        return ch.isalpha() or ch == "_"

    @staticmethod
    def is_digit(ch: str) -> bool:
        return ch.isdigit()

    def read_char(self):
        if self._read_position >= len(self._input):
            self._ch = "\0"
        else:
            self._ch = self._input[self._read_position]
        self._position = self._read_position
        self._read_position += 1

    def peek_char(self) -> str:
        if self._read_position >= len(self._input):
            return "\0"
        return self._input[self._read_position]

    def read_digits(self):
        while self.is_digit(self._ch):
            self.read_char()

    def read_number(self) -> str:
        # digits [. digits] [(e|E) [+|-] digits]
        position = self._position
        self.read_digits()
        if self._ch == ".":
            self.read_char()
            self.read_digits()
        if self._ch in ("e", "E") and (
            self.is_digit(self.peek_char()) or self.peek_char() in ("+", "-")
        ):
            self.read_char()
            if self._ch in ("+", "-"):
                self.read_char()
            self.read_digits()
        return self._input[position : self._position]

    def read_identifier(self) -> str:
        position = self._position
        while self.is_letter(self._ch) or self.is_digit(self._ch):
            self.read_char()
        return self._input[position : self._position]

    def skip_whitespace(self):
        while self._ch.isspace():
            self.read_char()

    def next_token(self) -> Token:
        self.skip_whitespace()
        position = self._position

        match self._ch:
            case "\0":
                token = Token(TokenType.EOF, self._ch, position)
            case ch if ch in SINGLE_CHARACTER_TOKENS:
                token = Token(SINGLE_CHARACTER_TOKENS[ch], ch, position)
            case _:
                if self.is_letter(self._ch):
                    return Token(TokenType.IDENT, self.read_identifier(), position)
                elif self.is_digit(self._ch) or (
                    self._ch == "." and self.is_digit(self.peek_char())
                ):
                    return Token(TokenType.NUMBER, self.read_number(), position)
                else:
                    token = Token(TokenType.ILLEGAL, self._ch, position)

        self.read_char()
        return token
