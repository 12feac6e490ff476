"""S-expression reader that keeps line/column positions."""

from __future__ import annotations


class PDDLSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.col = col


class SList(list):
    """A parenthesised list; ``line``/``col`` point at its opening paren."""

    def __init__(self, items=(), line: int = 0, col: int = 0):
        super().__init__(items)
        self.line = line
        self.col = col


class Token(str):
    """An atom.  Compares equal to its lower-cased text."""

    line: int
    col: int

    def __new__(cls, text: str, line: int = 0, col: int = 0):
        tok = super().__new__(cls, text)
        tok.line = line
        tok.col = col
        return tok


def tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
        elif c.isspace():
            i += 1
            col += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c, line, col
            i += 1
            col += 1
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
            yield text[start:i], line, col
            col += i - start


def parse_sexprs(text: str) -> list:
    """Parse every top-level expression in ``text``.  Atoms are lower-cased."""
    stack: list[SList] = [SList()]
    for tok, line, col in tokenize(text):
        if tok == "(":
            stack.append(SList(line=line, col=col))
        elif tok == ")":
            if len(stack) == 1:
                raise PDDLSyntaxError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(Token(tok.lower(), line, col))
    if len(stack) > 1:
        opened = stack[-1]
        raise PDDLSyntaxError("unclosed '('", opened.line, opened.col)
    return list(stack[0])


def parse_sexpr(text: str):
    exprs = parse_sexprs(text)
    if len(exprs) != 1:
        raise PDDLSyntaxError(f"expected one expression, found {len(exprs)}")
    return exprs[0]


def position(node) -> tuple[int | None, int | None]:
    return getattr(node, "line", None), getattr(node, "col", None)


def dump(node) -> str:
    if isinstance(node, list):
        return "(" + " ".join(dump(x) for x in node) + ")"
    return str(node)
