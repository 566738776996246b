"""
Literal parser - turns sequence and term text into control and monomial objects.

Grammar:
    sequence  := name | "[" item ("," item)* "]"
    item      := integer | element ("*" element)*
    element   := Pi | Pi1 | Pi2 | G | Gd | PiG | PiGd | PiGPi1 | Q | I | BS
                 | P(a,b) | BS(t)          angles in units of pi, e.g. P(1/2,-1/2)
    terms     := term ("," term)*
    term      := setname | [weight "*"] c(r,k)a(s,l)
    setname   := linear | A | B | C | bilinear
"""

import re
from fractions import Fraction
from typing import List, Tuple

from bbfiber.controls import (
    NAMED_ELEMENTS,
    NAMED_SEQUENCES,
    BeamSplitter,
    ControlElement,
    ControlSequence,
    PhaseShifter,
)
from bbfiber.exceptions import BBFiberError, ParseError
from bbfiber.monomials import NAMED_TERM_SETS, Monomial

_PREFIX = r"^\s*(?:seq|sequence|terms?|alphabet)\s*=\s*"
_SHIFTER = re.compile(r"^P\(\s*([-+]?\d+(?:/\d+)?)\s*,\s*([-+]?\d+(?:/\d+)?)\s*\)$")
_SPLITTER = re.compile(r"^BS\(\s*([-+]?\d+(?:/\d+)?)\s*\)$")
_TERM = re.compile(
    r"^(?:(?P<weight>[-+]?[\d.]+(?:[eE][-+]?\d+)?|\([^)]*\))\s*\*\s*)?"
    r"(?:c\(\s*(?P<r>\d+)\s*,\s*(?P<k>\d+)\s*\))?"
    r"(?:a\(\s*(?P<s>\d+)\s*,\s*(?P<l>\d+)\s*\))?$"
)


class LiteralParser:
    """Parses sequence, alphabet and term literals."""

    @staticmethod
    def parse_sequence(text: str) -> ControlSequence:
        """
        Parse a sequence literal or a named sequence.

        Args:
            text: e.g. "[2,Pi,1,Pi]" or "omega1234"

        Returns:
            ControlSequence

        Raises:
            ParseError: On malformed text or unknown names
        """
        text = re.sub(_PREFIX, "", text or "", flags=re.IGNORECASE).strip()
        if not text:
            raise ParseError("Empty sequence literal")

        if text.lower() in NAMED_SEQUENCES:
            return NAMED_SEQUENCES[text.lower()]

        match = re.match(r"^\[(.*)\]$", text, re.DOTALL)
        if not match:
            raise ParseError(f"Unknown sequence: {text[:50]}")

        items: List[object] = []
        for token in LiteralParser._split_items(match.group(1)):
            if re.fullmatch(r"\d+", token):
                items.append(int(token))
            else:
                items.append(LiteralParser.parse_element(token))
        try:
            return ControlSequence.from_items(items)
        except BBFiberError as e:
            raise ParseError(str(e)) from e

    @staticmethod
    def parse_element(token: str) -> ControlElement:
        """Parse one pulse, possibly a product such as Pi*Gd."""
        factors = [f.strip() for f in token.split("*")]
        if not all(factors):
            raise ParseError(f"Malformed product: {token}")
        element = LiteralParser._parse_factor(factors[0])
        for factor in factors[1:]:
            element = element * LiteralParser._parse_factor(factor)
        return element

    @staticmethod
    def _parse_factor(token: str) -> ControlElement:
        if token in NAMED_ELEMENTS:
            return NAMED_ELEMENTS[token]

        try:
            shifter = _SHIFTER.match(token)
            if shifter:
                return PhaseShifter(Fraction(shifter.group(1)), Fraction(shifter.group(2)))

            splitter = _SPLITTER.match(token)
            if splitter:
                return BeamSplitter(Fraction(splitter.group(1)))
        except ZeroDivisionError as e:
            raise ParseError(f"Invalid angle in {token}") from e

        raise ParseError(f"Unknown control element: {token}")

    @staticmethod
    def parse_alphabet(text: str) -> Tuple[ControlElement, ...]:
        """Parse a comma-separated list of pulses, brackets optional."""
        text = re.sub(_PREFIX, "", text or "", flags=re.IGNORECASE).strip()
        if text.startswith("[") and text.endswith("]"):
            text = text[1:-1]
        tokens = LiteralParser._split_items(text)
        if not tokens:
            raise ParseError("Empty alphabet")
        return tuple(LiteralParser.parse_element(token) for token in tokens)

    @staticmethod
    def parse_terms(text: str) -> Tuple[Monomial, ...]:
        """
        Parse a term list such as "linear,A" or "c(1,0)a(0,1), 0.5*c(2,0)a(0,2)".

        Named sets expand in place; order is preserved.
        """
        text = re.sub(_PREFIX, "", text or "", flags=re.IGNORECASE).strip()
        if text.startswith("{") and text.endswith("}"):
            text = text[1:-1]
        tokens = LiteralParser._split_items(text)
        if not tokens:
            raise ParseError("Empty term list")

        terms: List[Monomial] = []
        for token in tokens:
            named = LiteralParser._lookup_set(token)
            if named is not None:
                terms.extend(named)
            else:
                terms.append(LiteralParser._parse_term(token))
        return tuple(terms)

    @staticmethod
    def _lookup_set(token: str):
        if token in NAMED_TERM_SETS:
            return NAMED_TERM_SETS[token]
        lowered = token.lower()
        if lowered in ("linear", "bilinear"):
            return NAMED_TERM_SETS[lowered]
        return None

    @staticmethod
    def _parse_term(token: str) -> Monomial:
        compact = token.replace(" ", "")
        match = _TERM.match(compact)
        if not match or (match.group("r") is None and match.group("s") is None):
            raise ParseError(f"Invalid term: {token}")

        weight = LiteralParser._parse_weight(match.group("weight"))
        exponents = [int(match.group(name) or 0) for name in ("r", "s", "k", "l")]
        try:
            return Monomial(*exponents, weight=weight)
        except BBFiberError as e:
            raise ParseError(f"Invalid term {token}: {str(e)}") from e

    @staticmethod
    def _parse_weight(value) -> complex:
        if value is None:
            return 1.0
        value = value.strip("()")
        try:
            return complex(value)
        except ValueError as e:
            raise ParseError(f"Invalid weight: {value}") from e

    @staticmethod
    def _split_items(text: str) -> List[str]:
        """Split on commas outside parentheses."""
        items = []
        current = ""
        depth = 0

        for char in text:
            if char == "(":
                depth += 1
                current += char
            elif char == ")":
                depth -= 1
                if depth < 0:
                    raise ParseError("Unbalanced parentheses")
                current += char
            elif char == "," and depth == 0:
                if not current.strip():
                    raise ParseError("Empty item in list")
                items.append(current.strip())
                current = ""
            else:
                current += char

        if depth != 0:
            raise ParseError("Unbalanced parentheses")
        if current.strip():
            items.append(current.strip())
        elif items:
            raise ParseError("Trailing comma in list")

        return items
