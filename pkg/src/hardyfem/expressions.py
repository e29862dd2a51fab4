"""Parser for radial power-sum expressions.

Grammar (whitespace allowed between tokens)::

    expr := term ("+" term)*
    term := coeff "*r^" exponent | coeff

``coeff`` and ``exponent`` are signed decimal literals, e.g.
``"1*r^-0.5 + -1"`` or ``"3.1666*r^-2.3333 + -1.9444*r^-2"``.
"""

from __future__ import annotations

import re

from .errors import ConfigError
from .powersum import PowerSum

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_WS = re.compile(r"\s*")


class _Cursor:
    def __init__(self, text, line, col0):
        self.text = text
        self.pos = 0
        self.line = line
        self.col0 = col0

    def skip(self):
        self.pos = _WS.match(self.text, self.pos).end()

    def error(self, msg):
        raise ConfigError(msg, line=self.line, column=self.col0 + self.pos + 1)

    def number(self, what):
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        self.pos = m.end()
        return float(m.group())

    def literal(self, s):
        self.skip()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    @property
    def done(self):
        self.skip()
        return self.pos >= len(self.text)


def parse_expression(text: str, line: int | None = None, column: int = 1) -> PowerSum:
    """Parse ``text`` into a :class:`PowerSum`.

    ``line``/``column`` locate the expression inside a config file so
    errors point at the offending character.
    """
    cur = _Cursor(text, line, column - 1)
    if cur.done:
        cur.error("empty expression")
    terms = []
    while True:
        c = cur.number("coefficient")
        s = 0.0
        if cur.literal("*"):
            if not cur.literal("r"):
                cur.error("expected 'r' after '*'")
            if not cur.literal("^"):
                cur.error("expected '^' after 'r'")
            s = cur.number("exponent")
        terms.append((c, s))
        if cur.done:
            break
        if not cur.literal("+"):
            cur.error("expected '+' between terms")
    return PowerSum(terms)
