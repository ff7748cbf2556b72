"""Recursive descent parser producing a plain dataclass AST.

Statement separators are newlines or `;`.  Newlines are transparent inside
parentheses, brackets and table constructors, after a binary operator, and
before an `if`/`while` body or `else` clause; everywhere else they end the
current statement.
"""

from dataclasses import dataclass, field

from .errors import ParseError
from .lexer import tokenize


# --- AST ------------------------------------------------------------------

@dataclass
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


@dataclass
class NilLit(Node):
    pass


@dataclass
class IntLit(Node):
    value: int


@dataclass
class FloatLit(Node):
    value: float


@dataclass
class StrLit(Node):
    value: str


@dataclass
class Name(Node):
    name: str


@dataclass
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass
class UnOp(Node):
    op: str  # "-" or "not"
    operand: Node


@dataclass
class Member(Node):
    obj: Node
    name: str


@dataclass
class Index(Node):
    obj: Node
    key: Node


@dataclass
class Call(Node):
    fn: Node
    args: list


@dataclass
class MethodCall(Node):
    obj: Node
    key: Node  # StrLit for dot access, arbitrary expr for t[k](...)
    args: list


@dataclass
class TableLit(Node):
    pairs: list  # [(name str, expr)]


@dataclass
class FuncExpr(Node):
    params: list
    body: list  # statements


@dataclass
class Assign(Node):
    target: Node  # Name | Member | Index
    value: Node


@dataclass
class VarDecl(Node):
    name: str
    value: Node | None


@dataclass
class If(Node):
    cond: Node
    then: Node
    orelse: Node | None


@dataclass
class While(Node):
    cond: Node
    body: Node


@dataclass
class FuncDef(Node):
    name: str
    params: list
    body: list


@dataclass
class Return(Node):
    value: Node | None


@dataclass
class ExprStat(Node):
    expr: Node


@dataclass
class Block(Node):
    stmts: list


CMP_OPS = {"==", "!=", "<", "<=", ">", ">="}


class Parser:
    def __init__(self, tokens, origin="<script>"):
        self.tokens = tokens
        self.pos = 0
        self.origin = origin
        self.paren_depth = 0

    # --- token helpers ---

    def peek(self, skip_newlines=False):
        i = self.pos
        if skip_newlines or self.paren_depth > 0:
            while self.tokens[i].kind == "NEWLINE":
                i += 1
        return self.tokens[i]

    def advance(self, skip_newlines=False):
        if skip_newlines or self.paren_depth > 0:
            while self.tokens[self.pos].kind == "NEWLINE":
                self.pos += 1
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind, value=None, skip_newlines=False):
        tok = self.peek(skip_newlines)
        return tok.kind == kind and (value is None or tok.value == value)

    def expect(self, kind, value=None, hint=None, skip_newlines=False):
        tok = self.peek(skip_newlines)
        if tok.kind != kind or (value is not None and tok.value != value):
            got = repr(tok.value) if tok.value is not None else tok.kind
            raise ParseError(f"unexpected {got}", tok.line, tok.col,
                             self.origin, hint or value or kind)
        return self.advance(skip_newlines)

    def error(self, msg, tok=None, hint=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col, self.origin, hint)

    # --- statements ---

    def parse_program(self):
        stmts = self.parse_statements(until_eof=True)
        return stmts

    def parse_statements(self, until_eof=False):
        stmts = []
        while True:
            while self.at("NEWLINE") or self.at("OP", ";"):
                self.advance()
            if until_eof and self.at("EOF"):
                return stmts
            if not until_eof and self.at("OP", "}"):
                return stmts
            if self.at("EOF"):
                if until_eof:
                    return stmts
                self.error("unexpected end of input", hint="'}'")
            stmts.append(self.parse_statement())
            # a statement must be followed by a separator, '}' or EOF
            tok = self.peek()
            if tok.kind in ("NEWLINE", "EOF") or \
               (tok.kind == "OP" and tok.value in (";", "}")):
                continue
            self.error(f"unexpected {tok.value!r} after statement",
                       hint="newline or ';'")

    def parse_statement(self):
        tok = self.peek()
        if tok.kind == "KEYWORD":
            if tok.value == "if":
                return self.parse_if()
            if tok.value == "while":
                return self.parse_while()
            if tok.value == "var":
                return self.parse_var()
            if tok.value == "return":
                return self.parse_return()
            if tok.value == "function" and \
               self.tokens[self.pos + 1].kind == "IDENT":
                return self.parse_funcdef()
        if tok.kind == "OP" and tok.value == "{":
            self.advance()
            body = self.parse_statements()
            self.expect("OP", "}")
            return Block(body, line=tok.line, col=tok.col)
        # assignment or expression statement
        expr = self.parse_expr()
        if self.at("OP", "="):
            if not isinstance(expr, (Name, Member, Index)):
                self.error("invalid assignment target")
            self.advance()
            value = self.parse_expr(skip_newlines=True)
            return Assign(expr, value, line=expr.line, col=expr.col)
        return ExprStat(expr, line=expr.line, col=expr.col)

    def parse_body_statement(self):
        # if/while bodies may start on the following line
        self.skip_newlines()
        return self.parse_statement()

    def skip_newlines(self):
        while self.tokens[self.pos].kind == "NEWLINE":
            self.pos += 1

    def parse_if(self):
        tok = self.expect("KEYWORD", "if")
        self.expect("OP", "(", hint="'(' after if")
        self.paren_depth += 1
        cond = self.parse_expr()
        self.paren_depth -= 1
        self.expect("OP", ")")
        then = self.parse_body_statement()
        orelse = None
        # else may appear after newlines/comments
        mark = self.pos
        self.skip_newlines()
        if self.at("KEYWORD", "else"):
            self.advance()
            orelse = self.parse_body_statement()
        else:
            self.pos = mark
        return If(cond, then, orelse, line=tok.line, col=tok.col)

    def parse_while(self):
        tok = self.expect("KEYWORD", "while")
        self.expect("OP", "(", hint="'(' after while")
        self.paren_depth += 1
        cond = self.parse_expr()
        self.paren_depth -= 1
        self.expect("OP", ")")
        body = self.parse_body_statement()
        return While(cond, body, line=tok.line, col=tok.col)

    def parse_var(self):
        tok = self.expect("KEYWORD", "var")
        name = self.expect("IDENT", hint="variable name")
        value = None
        if self.at("OP", "="):
            self.advance()
            value = self.parse_expr(skip_newlines=True)
        return VarDecl(name.value, value, line=tok.line, col=tok.col)

    def parse_return(self):
        tok = self.expect("KEYWORD", "return")
        nxt = self.peek()
        value = None
        if not (nxt.kind in ("NEWLINE", "EOF") or
                (nxt.kind == "OP" and nxt.value in (";", "}"))):
            value = self.parse_expr()
        return Return(value, line=tok.line, col=tok.col)

    def parse_funcdef(self):
        tok = self.expect("KEYWORD", "function")
        name = self.expect("IDENT", hint="function name")
        params = self.parse_params()
        body = self.parse_func_body()
        return FuncDef(name.value, params, body, line=tok.line, col=tok.col)

    def parse_params(self):
        self.expect("OP", "(", hint="parameter list")
        params = []
        self.paren_depth += 1
        if not self.at("OP", ")"):
            while True:
                params.append(self.expect("IDENT", hint="parameter name").value)
                if self.at("OP", ","):
                    self.advance()
                    continue
                break
        self.paren_depth -= 1
        self.expect("OP", ")")
        return params

    def parse_func_body(self):
        self.expect("OP", "{", hint="function body", skip_newlines=True)
        saved = self.paren_depth
        self.paren_depth = 0
        body = self.parse_statements()
        self.paren_depth = saved
        self.expect("OP", "}")
        return body

    # --- expressions ---

    def parse_expr(self, skip_newlines=False):
        if skip_newlines:
            self.skip_newlines()
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.at("KEYWORD", "or"):
            tok = self.advance()
            right = self.parse_and()
            left = BinOp("or", left, right, line=tok.line, col=tok.col)
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at("KEYWORD", "and"):
            tok = self.advance()
            right = self.parse_not()
            left = BinOp("and", left, right, line=tok.line, col=tok.col)
        return left

    def parse_not(self):
        self.skip_newlines()  # operand position: newlines never end it
        if self.at("KEYWORD", "not"):
            tok = self.advance()
            operand = self.parse_not()
            return UnOp("not", operand, line=tok.line, col=tok.col)
        return self.parse_cmp()

    def parse_cmp(self):
        left = self.parse_add()
        while self.at("OP") and self.peek().value in CMP_OPS:
            tok = self.advance()
            right = self.parse_add()
            left = BinOp(tok.value, left, right, line=tok.line, col=tok.col)
        return left

    def parse_add(self):
        left = self.parse_mul()
        while self.at("OP") and self.peek().value in ("+", "-"):
            tok = self.advance()
            right = self.parse_mul()
            left = BinOp(tok.value, left, right, line=tok.line, col=tok.col)
        return left

    def parse_mul(self):
        left = self.parse_unary()
        while self.at("OP") and self.peek().value in ("*", "/", "%"):
            tok = self.advance()
            right = self.parse_unary()
            left = BinOp(tok.value, left, right, line=tok.line, col=tok.col)
        return left

    def parse_unary(self):
        self.skip_newlines()  # operand position
        if self.at("OP", "-"):
            tok = self.advance()
            operand = self.parse_unary()
            return UnOp("-", operand, line=tok.line, col=tok.col)
        return self.parse_pow()

    def parse_pow(self):
        base = self.parse_postfix()
        if self.at("OP", "^"):
            tok = self.advance()
            # right-associative; exponent may itself be unary (2^-3)
            exponent = self.parse_unary()
            return BinOp("^", base, exponent, line=tok.line, col=tok.col)
        return base

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            if self.at("OP", "."):
                self.advance()
                name = self.expect("IDENT", hint="member name")
                if self.at("OP", "("):
                    args = self.parse_args()
                    expr = MethodCall(expr, StrLit(name.value, line=name.line,
                                                   col=name.col),
                                      args, line=name.line, col=name.col)
                else:
                    expr = Member(expr, name.value, line=name.line,
                                  col=name.col)
            elif self.at("OP", "["):
                tok = self.advance()
                self.paren_depth += 1
                key = self.parse_expr()
                self.paren_depth -= 1
                self.expect("OP", "]")
                if self.at("OP", "("):
                    args = self.parse_args()
                    expr = MethodCall(expr, key, args, line=tok.line,
                                      col=tok.col)
                else:
                    expr = Index(expr, key, line=tok.line, col=tok.col)
            elif self.at("OP", "("):
                tok = self.peek()
                args = self.parse_args()
                expr = Call(expr, args, line=tok.line, col=tok.col)
            else:
                return expr

    def parse_args(self):
        self.expect("OP", "(")
        args = []
        self.paren_depth += 1
        if not self.at("OP", ")"):
            while True:
                args.append(self.parse_expr())
                if self.at("OP", ","):
                    self.advance()
                    continue
                break
        self.paren_depth -= 1
        self.expect("OP", ")")
        return args

    def parse_primary(self):
        self.skip_newlines()  # operand position
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return IntLit(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "FLOAT":
            self.advance()
            return FloatLit(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "STRING":
            self.advance()
            return StrLit(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "IDENT":
            self.advance()
            return Name(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "KEYWORD":
            if tok.value == "nil":
                self.advance()
                return NilLit(line=tok.line, col=tok.col)
            if tok.value == "function":
                self.advance()
                params = self.parse_params()
                body = self.parse_func_body()
                return FuncExpr(params, body, line=tok.line, col=tok.col)
        if tok.kind == "OP":
            if tok.value == "(":
                self.advance()
                self.paren_depth += 1
                expr = self.parse_expr()
                self.paren_depth -= 1
                self.expect("OP", ")")
                return expr
            if tok.value == "{":
                return self.parse_table()
        self.error("expected expression", tok)

    def parse_table(self):
        tok = self.expect("OP", "{")
        self.paren_depth += 1
        pairs = []
        if not self.at("OP", "}"):
            while True:
                name = self.expect("IDENT", hint="table key")
                self.expect("OP", "=", hint="'=' in table constructor")
                value = self.parse_expr()
                pairs.append((name.value, value))
                if self.at("OP", ","):
                    self.advance()
                    continue
                break
        self.paren_depth -= 1
        self.expect("OP", "}")
        return TableLit(pairs, line=tok.line, col=tok.col)


def parse(text, origin="<script>"):
    """Parse source text into a list of statements."""
    return Parser(tokenize(text, origin), origin).parse_program()
