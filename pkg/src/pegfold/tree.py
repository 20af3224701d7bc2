"""Syntax tree nodes and their textual notation.

A node is ``#tag`` plus a byte span over the parsed input and an ordered
tuple of children.  Leaves render with their matched substring, inner
nodes with their children only::

    #Add[#Int['1'] #Int['2']]

``serialize`` produces that notation bit-exactly (quotes and backslashes
escaped, non-printable bytes as ``\\xHH``); ``parse_notation`` is its
structural inverse with synthesized spans.  Nodes compare by identity;
use :func:`equals` for structural comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

__all__ = ["Node", "NotationError", "serialize", "parse_notation", "equals", "to_json_dict"]


@dataclass(frozen=True, eq=False)
class Node:
    """Immutable tree node: tag, byte span over ``source``, children."""

    tag: str
    start: int
    end: int
    source: bytes
    children: tuple[Node, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.tag:
            raise ValueError("node tag must be non-empty")
        if not (0 <= self.start <= self.end <= len(self.source)):
            raise ValueError(f"bad span {self.start}..{self.end} for {len(self.source)}-byte source")

    @property
    def text(self) -> bytes:
        """The matched substring, byte-exact."""
        return self.source[self.start : self.end]

    def is_leaf(self) -> bool:
        return not self.children

    def __repr__(self) -> str:
        return f"<Node {serialize(self)}>"


class NotationError(ValueError):
    """Raised by :func:`parse_notation` on malformed notation text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


def _quote(data: bytes) -> str:
    out = []
    for b in data:
        if b == 0x27:
            out.append("\\'")
        elif b == 0x5C:
            out.append("\\\\")
        elif 0x20 <= b < 0x7F:
            out.append(chr(b))
        else:
            out.append(f"\\x{b:02X}")
    return "'" + "".join(out) + "'"


def serialize(node: Node, include_inner_text: bool = False) -> str:
    """Renders ``node`` in textual notation.

    Leaves always carry their matched substring; substrings of inner
    nodes are omitted unless ``include_inner_text`` is set (a debug view
    that is not meant to be re-parsed).
    """
    parts: list[str] = []
    _serialize(node, include_inner_text, parts)
    return "".join(parts)


def _serialize(node: Node, include_inner_text: bool, parts: list[str]) -> None:
    parts.append(f"#{node.tag}[")
    if node.is_leaf():
        parts.append(_quote(node.text))
    else:
        if include_inner_text:
            parts.append(_quote(node.text))
            parts.append(" ")
        for i, child in enumerate(node.children):
            if i:
                parts.append(" ")
            _serialize(child, include_inner_text, parts)
    parts.append("]")


def equals(a: Node, b: Node) -> bool:
    """Structural equality: tags, leaf substrings and child shape; spans ignored."""
    if a.tag != b.tag or len(a.children) != len(b.children):
        return False
    if a.is_leaf():
        return a.text == b.text
    return all(equals(x, y) for x, y in zip(a.children, b.children))


def to_json_dict(node: Node) -> dict[str, Any]:
    """JSON-ready form: tag, span, and leaf text or children."""
    d: dict[str, Any] = {"tag": node.tag, "start": node.start, "end": node.end}
    if node.is_leaf():
        d["text"] = node.text.decode("utf-8", errors="backslashreplace")
    else:
        d["children"] = [to_json_dict(c) for c in node.children]
    return d


class _NotationReader:
    """Recursive-descent reader for the textual notation."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> NotationError:
        return NotationError(message, self.pos)

    def skip_space(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def expect(self, ch: str) -> None:
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def read_node(self) -> Node:
        self.expect("#")
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        tag = self.text[start : self.pos]
        if not tag:
            raise self.error("expected tag name after '#'")
        self.expect("[")
        self.skip_space()
        if self.pos < len(self.text) and self.text[self.pos] == "'":
            text = self.read_quoted()
            self.skip_space()
            self.expect("]")
            return Node(tag, 0, len(text), text, ())
        children = []
        while self.pos < len(self.text) and self.text[self.pos] == "#":
            children.append(self.read_node())
            self.skip_space()
        if not children:
            raise self.error("node needs a quoted substring or at least one child")
        self.expect("]")
        return Node(tag, 0, 0, b"", tuple(children))

    def read_quoted(self) -> bytes:
        self.expect("'")
        out = bytearray()
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated quoted text")
            ch = self.text[self.pos]
            if ch == "'":
                self.pos += 1
                return bytes(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= len(self.text):
                    raise self.error("dangling escape")
                esc = self.text[self.pos]
                if esc == "'":
                    out.append(0x27)
                elif esc == "\\":
                    out.append(0x5C)
                elif esc == "x":
                    hexpart = self.text[self.pos + 1 : self.pos + 3]
                    if len(hexpart) != 2 or any(c not in "0123456789abcdefABCDEF" for c in hexpart):
                        raise self.error("bad \\xHH escape")
                    out.append(int(hexpart, 16))
                    self.pos += 2
                else:
                    raise self.error(f"unknown escape \\{esc}")
                self.pos += 1
            else:
                out.extend(ch.encode("utf-8"))
                self.pos += 1


def parse_notation(text: str) -> Node:
    """Parses textual notation back into a node shape.

    Tags, leaf substrings and structure are recovered exactly; spans are
    synthesized (leaves span their own substring, inner nodes are empty),
    so compare results with :func:`equals`, not by span.
    """
    reader = _NotationReader(text)
    reader.skip_space()
    node = reader.read_node()
    reader.skip_space()
    if reader.pos != len(text):
        raise reader.error("trailing text after node")
    return node
