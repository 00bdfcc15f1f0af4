"""Small expression language for generalized-function experiments.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := factor ('*' factor)*
    factor  := atom ['^' INT] ["'"]*
    atom    := 'H' | 'D' | 'x' | NUMBER | '(' expr ')'
             | 'int' '(' expr ')' | 'pair' '(' expr ',' INT ')'

``H`` is the embedded Heaviside step, ``D`` the embedded delta, ``'`` the
exact derivative, ``int(e)`` the integral over the whole line and
``pair(e, k)`` the pairing against test function k of the active suite.
``int`` and ``pair`` produce number-valued expressions; numbers and
functions cannot be mixed multiplicatively (literal constants may appear in
either role).
"""

from dataclasses import dataclass, field

from .core import (
    GenfunError,
    GenNumber,
    combine,
    compose_polynomial,
    constant,
    identity,
)
from .quadrature import integrate_gf, pair, DEFAULT_TOL_SWEEP
from .asymptotics import classify, DEFAULT_GRID, DEFAULT_THRESHOLDS


class ExprSyntaxError(GenfunError):
    """Syntax error with byte offset and the expected token set."""

    def __init__(self, offset, expected, found):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        self.found = found
        super().__init__(
            f"syntax error at offset {offset}: expected one of "
            f"{', '.join(self.expected)}; found {found}"
        )


class ExprTypeError(GenfunError):
    """Type error (e.g. integrating a number) with the offending node's span."""

    def __init__(self, message, span):
        self.span = span
        super().__init__(f"type error at offset {span[0]}..{span[1]}: {message}")


class ExprEvalError(GenfunError):
    """Evaluation failure re-raised with the expression span attached."""

    def __init__(self, message, span):
        self.span = span
        super().__init__(f"evaluation error at offset {span[0]}..{span[1]}: {message}")


# ---------------------------------------------------------------- AST nodes

def _span_field():
    return field(compare=False, repr=False, default=(0, 0))


@dataclass(frozen=True)
class Heaviside:
    span: tuple = _span_field()


@dataclass(frozen=True)
class Delta:
    span: tuple = _span_field()


@dataclass(frozen=True)
class Var:
    span: tuple = _span_field()


@dataclass(frozen=True)
class Const:
    value: float
    span: tuple = _span_field()


@dataclass(frozen=True)
class Add:
    left: object
    right: object
    span: tuple = _span_field()


@dataclass(frozen=True)
class Sub:
    left: object
    right: object
    span: tuple = _span_field()


@dataclass(frozen=True)
class Mul:
    left: object
    right: object
    span: tuple = _span_field()


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int
    span: tuple = _span_field()


@dataclass(frozen=True)
class Prime:
    child: object
    span: tuple = _span_field()


@dataclass(frozen=True)
class Int:
    child: object
    span: tuple = _span_field()


@dataclass(frozen=True)
class Pair:
    child: object
    psi_index: int
    span: tuple = _span_field()


# ---------------------------------------------------------------- tokenizer

_SYMBOLS = {"+", "-", "*", "^", "'", "(", ")", ","}
_KEYWORDS = {"H", "D", "x", "int", "pair"}


def _tokenize(text):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _SYMBOLS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            try:
                float(lexeme)
            except ValueError:
                raise ExprSyntaxError(i, {"number"}, repr(lexeme)) from None
            tokens.append(("number", lexeme, i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            word = text[i:j]
            if word not in _KEYWORDS:
                raise ExprSyntaxError(
                    i, {"'H'", "'D'", "'x'", "'int'", "'pair'"}, repr(word)
                )
            tokens.append((word, word, i))
            i = j
            continue
        raise ExprSyntaxError(i, {"expression"}, repr(ch))
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            raise ExprSyntaxError(tok[2], {f"'{kind}'"}, self._describe(tok))
        return self.advance()

    @staticmethod
    def _describe(tok):
        return "end of input" if tok[0] == "eof" else repr(tok[1])

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise ExprSyntaxError(
                tok[2], {"'+'", "'-'", "'*'", "end of input"}, self._describe(tok)
            )
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()
            right = self.term()
            span = (node.span[0], right.span[1])
            node = Add(node, right, span) if op[0] == "+" else Sub(node, right, span)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "*":
            self.advance()
            right = self.factor()
            node = Mul(node, right, (node.span[0], right.span[1]))
        return node

    def factor(self):
        node = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.expect("number")
            try:
                exponent = int(tok[1])
            except ValueError:
                raise ExprSyntaxError(tok[2], {"integer"}, repr(tok[1])) from None
            if exponent < 1:
                raise ExprSyntaxError(tok[2], {"integer >= 1"}, repr(tok[1]))
            node = Pow(node, exponent, (node.span[0], tok[2] + len(tok[1])))
        while self.peek()[0] == "'":
            tok = self.advance()
            node = Prime(node, (node.span[0], tok[2] + 1))
        return node

    def atom(self):
        tok = self.peek()
        kind = tok[0]
        start = tok[2]
        if kind == "H":
            self.advance()
            return Heaviside((start, start + 1))
        if kind == "D":
            self.advance()
            return Delta((start, start + 1))
        if kind == "x":
            self.advance()
            return Var((start, start + 1))
        if kind == "number":
            self.advance()
            return Const(float(tok[1]), (start, start + len(tok[1])))
        if kind == "(":
            self.advance()
            node = self.expr()
            close = self.expect(")")
            return _with_span(node, (start, close[2] + 1))
        if kind == "int":
            self.advance()
            self.expect("(")
            child = self.expr()
            close = self.expect(")")
            return Int(child, (start, close[2] + 1))
        if kind == "pair":
            self.advance()
            self.expect("(")
            child = self.expr()
            self.expect(",")
            idx_tok = self.expect("number")
            try:
                idx = int(idx_tok[1])
            except ValueError:
                raise ExprSyntaxError(idx_tok[2], {"integer"}, repr(idx_tok[1])) from None
            if idx < 0:
                raise ExprSyntaxError(idx_tok[2], {"integer >= 0"}, repr(idx_tok[1]))
            close = self.expect(")")
            return Pair(child, idx, (start, close[2] + 1))
        raise ExprSyntaxError(
            start,
            {"'H'", "'D'", "'x'", "number", "'('", "'int'", "'pair'"},
            self._describe(tok),
        )


def _with_span(node, span):
    return type(node)(**{
        **{f.name: getattr(node, f.name) for f in node.__dataclass_fields__.values()},
        "span": span,
    })


def parse_genexpr(text):
    """Parse an expression into its AST and type-check it."""
    node = _Parser(text).parse()
    infer_kind(node)
    return node


# ------------------------------------------------------------- type checking

FUNC = "function"
NUM = "number"
CONST = "constant"


def infer_kind(node):
    """Value kind of a node: function-, number-, or constant-valued.

    Constants coerce to either side; mixing a number-valued node (an
    ``int``/``pair`` result) into a function-valued product or sum is
    rejected.
    """
    if isinstance(node, (Heaviside, Delta, Var)):
        return FUNC
    if isinstance(node, Const):
        return CONST
    if isinstance(node, (Add, Sub, Mul)):
        kl = infer_kind(node.left)
        kr = infer_kind(node.right)
        if {kl, kr} == {FUNC, NUM}:
            raise ExprTypeError(
                "cannot combine a number-valued and a function-valued expression",
                node.span,
            )
        if FUNC in (kl, kr):
            return FUNC
        if NUM in (kl, kr):
            return NUM
        return CONST
    if isinstance(node, Pow):
        return infer_kind(node.base)
    if isinstance(node, Prime):
        k = infer_kind(node.child)
        if k == NUM:
            raise ExprTypeError(
                "derivative applies only to function-valued expressions", node.span
            )
        return FUNC
    if isinstance(node, Int):
        k = infer_kind(node.child)
        if k == NUM:
            raise ExprTypeError("cannot integrate a number-valued expression", node.span)
        return NUM
    if isinstance(node, Pair):
        k = infer_kind(node.child)
        if k == NUM:
            raise ExprTypeError("cannot pair a number-valued expression", node.span)
        return NUM
    raise TypeError(f"unknown AST node {node!r}")


# ------------------------------------------------------------ pretty printer

_PREC_ADD, _PREC_MUL, _PREC_POSTFIX, _PREC_ATOM = 1, 2, 3, 4


def _prec(node):
    if isinstance(node, (Add, Sub)):
        return _PREC_ADD
    if isinstance(node, Mul):
        return _PREC_MUL
    if isinstance(node, (Pow, Prime)):
        return _PREC_POSTFIX
    return _PREC_ATOM


def pretty(node):
    """Canonical text form; ``parse_genexpr(pretty(ast))`` is structurally
    identical to ``ast`` (spans excluded from comparison)."""

    def wrap(child, minimum):
        s = pretty(child)
        return f"({s})" if _prec(child) < minimum else s

    if isinstance(node, Heaviside):
        return "H"
    if isinstance(node, Delta):
        return "D"
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Add):
        return f"{wrap(node.left, _PREC_ADD)} + {wrap(node.right, _PREC_ADD + 1)}"
    if isinstance(node, Sub):
        return f"{wrap(node.left, _PREC_ADD)} - {wrap(node.right, _PREC_ADD + 1)}"
    if isinstance(node, Mul):
        return f"{wrap(node.left, _PREC_MUL)} * {wrap(node.right, _PREC_MUL + 1)}"
    if isinstance(node, Pow):
        return f"{wrap(node.base, _PREC_ATOM)}^{node.exponent}"
    if isinstance(node, Prime):
        base = pretty(node.child)
        if _prec(node.child) < _PREC_POSTFIX:
            base = f"({base})"
        return f"{base}'"
    if isinstance(node, Int):
        return f"int({pretty(node.child)})"
    if isinstance(node, Pair):
        return f"pair({pretty(node.child)}, {node.psi_index})"
    raise TypeError(f"unknown AST node {node!r}")


# -------------------------------------------------------------- compilation

def _compile(node, mollifier, suite, tol):
    """Returns (kind, value) with value a GenFunction, GenNumber or float."""
    from .embedding import embed_delta, embed_heaviside

    if isinstance(node, Heaviside):
        return FUNC, embed_heaviside(mollifier)
    if isinstance(node, Delta):
        return FUNC, embed_delta(mollifier)
    if isinstance(node, Var):
        return FUNC, identity()
    if isinstance(node, Const):
        return CONST, float(node.value)

    if isinstance(node, (Add, Sub, Mul)):
        kl, left = _compile(node.left, mollifier, suite, tol)
        kr, right = _compile(node.right, mollifier, suite, tol)
        op = {Add: "add", Sub: "sub", Mul: "mul"}[type(node)]
        if CONST in (kl, kr) and kl != kr:
            # Promote the constant to the other side's kind.
            if kl == CONST:
                kl, left = _promote(kr, left_const=left)
            else:
                kr, right = _promote(kl, left_const=right)
        if kl == CONST:
            value = {"add": left + right, "sub": left - right,
                     "mul": left * right}[op]
            return CONST, value
        if kl == FUNC:
            return FUNC, combine(op, left, right)
        value = {"add": left + right, "sub": left - right,
                 "mul": left * right}[op]
        return NUM, value

    if isinstance(node, Pow):
        k, base = _compile(node.base, mollifier, suite, tol)
        if k == CONST:
            return CONST, base ** node.exponent
        if k == FUNC:
            coeffs = [0.0] * node.exponent + [1.0]
            return FUNC, compose_polynomial(coeffs, base)
        return NUM, base ** node.exponent

    if isinstance(node, Prime):
        k, child = _compile(node.child, mollifier, suite, tol)
        if k == CONST:
            child = constant(child)
        return FUNC, child.derivative()

    if isinstance(node, Int):
        k, child = _compile(node.child, mollifier, suite, tol)
        if k == CONST:
            child = constant(child)
        gn = integrate_gf(child, float("-inf"), float("inf"), tol=tol)
        return NUM, _spanned(gn, node.span)

    if isinstance(node, Pair):
        k, child = _compile(node.child, mollifier, suite, tol)
        if k == CONST:
            child = constant(child)
        if node.psi_index >= len(suite):
            raise ExprEvalError(
                f"test function index {node.psi_index} out of range "
                f"(suite has {len(suite)})",
                node.span,
            )
        psi = suite[node.psi_index]
        gn = GenNumber(
            lambda e: pair(child, psi, e, tol=tol),
            f"pair({child.description}, {node.psi_index})",
        )
        return NUM, _spanned(gn, node.span)

    raise TypeError(f"unknown AST node {node!r}")


def _promote(kind, left_const):
    if kind == FUNC:
        return FUNC, constant(left_const)
    return NUM, GenNumber.constant(left_const)


def _spanned(gn, span):
    """Wrap a GenNumber so package errors carry the producing node's span."""

    def at(eps):
        try:
            return gn.at(eps)
        except ExprEvalError:
            raise
        except GenfunError as exc:
            raise ExprEvalError(str(exc), span) from exc

    return GenNumber(at, gn.description)


def compile_genexpr(ast, mollifier, suite, tol=DEFAULT_TOL_SWEEP):
    """Compile a type-checked AST to a GenFunction or GenNumber."""
    kind, value = _compile(ast, mollifier, suite, tol)
    if kind == CONST:
        return NUM, GenNumber.constant(value)
    return kind, value


class ExprReport:
    """Evaluation result: an eps table plus classification, or sampled
    function values per eps."""

    __slots__ = ("text", "kind", "samples", "classification", "function_table")

    def __init__(self, text, kind, samples=None, classification=None,
                 function_table=None):
        self.text = text
        self.kind = kind
        self.samples = samples
        self.classification = classification
        self.function_table = function_table


FUNCTION_SAMPLE_POINTS = 201


def eval_genexpr(ast, mollifier, grid=DEFAULT_GRID, suite=(),
                 tol=DEFAULT_TOL_SWEEP, thresholds=DEFAULT_THRESHOLDS):
    """Evaluate a parsed expression over the epsilon grid.

    Number-valued expressions yield the (eps, value) table and its
    asymptotic classification; function-valued ones yield representative
    samples per eps over a window covering the active region.
    """
    import numpy as np

    kind, value = compile_genexpr(ast, mollifier, suite, tol)
    text = pretty(ast)
    if kind == NUM:
        samples = [(float(e), value.at(float(e))) for e in grid.values()]
        return ExprReport(text, NUM, samples=samples,
                          classification=classify(value, grid, thresholds))

    eps_values = grid.values()
    window = (-1.0, 1.0)
    hint = value.at(float(eps_values[0])).support_hint
    if hint is not None:
        window = (min(window[0], hint[0]), max(window[1], hint[1]))
    xs = np.linspace(window[0], window[1], FUNCTION_SAMPLE_POINTS)
    rows = []
    for e in eps_values:
        rep = value.at(float(e))
        vals = np.asarray(rep.eval(xs), dtype=float)
        rows.extend((float(e), float(x), float(v)) for x, v in zip(xs, vals))
    return ExprReport(text, FUNC, function_table=rows)
