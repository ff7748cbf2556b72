"""Single-pass compiler from AST to a relocatable object unit.

Name resolution: `var` declares a slot in the enclosing function (or the
top-level frame); parameters and `self` are slots too.  Anything else is a
global: loads of unknown names yield nil at run time, stores create the
global.  Nested functions reach enclosing slots through (depth, slot)
upvalue instructions; frames are shared by reference, so captured locals
alias the originals.
"""

from dataclasses import dataclass, field

from . import opcodes as op
from . import parser as ast
from .errors import CompileError
from .parser import parse

INT32_MIN, INT32_MAX = -(2 ** 31), 2 ** 31 - 1
INT64_MIN, INT64_MAX = -(2 ** 63), 2 ** 63 - 1


class Label:
    """Opaque code position resolved at link time."""

    __slots__ = ("name",)

    def __init__(self, name=None):
        self.name = name

    def __repr__(self):
        return f"Label({self.name or hex(id(self))})"


@dataclass
class Instr:
    op: int
    args: tuple = ()
    line: int = 0
    col: int = 0


@dataclass
class LabelMark:
    """Zero-width marker binding a label to the next instruction."""
    label: Label


@dataclass
class ObjectUnit:
    """Compiled, unlinked code for one script."""

    origin: str
    strings: list = field(default_factory=list)   # interned strings
    consts: list = field(default_factory=list)    # ("i"|"f", value)
    main: list = field(default_factory=list)      # top-level Instr/LabelMark
    funcs: list = field(default_factory=list)     # function body stream
    functions: dict = field(default_factory=dict)  # top-level name -> Label
    global_names: list = field(default_factory=list)
    local_names: list = field(default_factory=list)
    string_consts: list = field(default_factory=list)

    def symbols(self):
        """(name, kind) pairs for inspection and link-time reporting."""
        out = [(name, "global") for name in self.global_names]
        out += [(name, "local") for name in self.local_names]
        out += [(s, "string-const") for s in self.string_consts]
        return out


class _Scope:
    def __init__(self, parent, is_toplevel=False):
        self.parent = parent
        self.is_toplevel = is_toplevel
        self.slots = {"self": 0}

    def declare(self, name):
        if name not in self.slots:
            self.slots[name] = len(self.slots)
        return self.slots[name]

    def resolve(self, name):
        depth = 0
        scope = self
        while scope is not None:
            if name in scope.slots:
                return depth, scope.slots[name], scope
            scope = scope.parent
            depth += 1
        return None


class Compiler:
    def __init__(self, origin="<script>"):
        self.unit = ObjectUnit(origin)
        self._string_ids = {}
        self._const_ids = {}
        self._pending = []  # (FuncExpr/FuncDef, scope, entry label)

    # --- pools ---

    def intern(self, s):
        idx = self._string_ids.get(s)
        if idx is None:
            idx = len(self.unit.strings)
            self.unit.strings.append(s)
            self._string_ids[s] = idx
        return idx

    def const(self, tag, value):
        if tag == "f":
            key = (tag, value.hex())  # distinguish -0.0, keep exact bits
        else:
            key = (tag, value)
        idx = self._const_ids.get(key)
        if idx is None:
            idx = len(self.unit.consts)
            self.unit.consts.append((tag, value))
            self._const_ids[key] = idx
        return idx

    def note_symbol(self, name, kind):
        table = {"global": self.unit.global_names,
                 "local": self.unit.local_names,
                 "string-const": self.unit.string_consts}[kind]
        if name not in table:
            table.append(name)

    # --- emission ---

    def emit(self, out, opcode, *args, node=None):
        line = node.line if node is not None else 0
        col = node.col if node is not None else 0
        out.append(Instr(opcode, tuple(args), line, col))

    def mark(self, out, label):
        out.append(LabelMark(label))

    def error(self, msg, node):
        raise CompileError(msg, node.line, node.col, self.unit.origin)

    # --- top level ---

    def compile_program(self, stmts):
        scope = _Scope(None, is_toplevel=True)
        for stmt in stmts:
            self.compile_stmt(stmt, scope, self.unit.main)
        # function bodies are emitted after all top-level code
        while self._pending:
            node, defscope, entry = self._pending.pop(0)
            self.compile_function_body(node, defscope, entry)
        self.unit.toplevel_nlocals = len(scope.slots)
        return self.unit

    def compile_function_body(self, node, defscope, entry):
        out = self.unit.funcs
        scope = _Scope(defscope)
        for p in node.params:
            scope.declare(p)
            self.note_symbol(p, "local")
        nparams = len(node.params)
        self.mark(out, entry)
        header = Instr(op.FUNC, (nparams, 0), node.line, node.col)
        out.append(header)
        for stmt in node.body:
            self.compile_stmt(stmt, scope, out)
        last = out[-1]
        if not (isinstance(last, Instr) and last.op in (op.RET, op.RETN)):
            self.emit(out, op.RETN, node=node)
        header.args = (nparams, len(scope.slots))

    # --- statements ---

    def compile_stmt(self, stmt, scope, out):
        if isinstance(stmt, ast.Assign):
            self.compile_assign(stmt, scope, out)
        elif isinstance(stmt, ast.VarDecl):
            slot = scope.declare(stmt.name)
            self.note_symbol(stmt.name, "local")
            if stmt.value is not None:
                self.compile_expr(stmt.value, scope, out)
                self.emit(out, op.LSTORE, slot, node=stmt)
        elif isinstance(stmt, ast.If):
            self.compile_expr(stmt.cond, scope, out)
            l_else = Label()
            self.emit(out, op.JUMPF, l_else, node=stmt)
            self.compile_stmt(stmt.then, scope, out)
            if stmt.orelse is not None:
                l_end = Label()
                self.emit(out, op.JUMP, l_end, node=stmt)
                self.mark(out, l_else)
                self.compile_stmt(stmt.orelse, scope, out)
                self.mark(out, l_end)
            else:
                self.mark(out, l_else)
        elif isinstance(stmt, ast.While):
            l_start, l_end = Label(), Label()
            self.mark(out, l_start)
            self.compile_expr(stmt.cond, scope, out)
            self.emit(out, op.JUMPF, l_end, node=stmt)
            self.compile_stmt(stmt.body, scope, out)
            self.emit(out, op.JUMP, l_start, node=stmt)
            self.mark(out, l_end)
        elif isinstance(stmt, ast.FuncDef):
            entry = Label(stmt.name)
            self._pending.append((stmt, scope, entry))
            self.emit(out, op.MKCLOSURE, entry, node=stmt)
            self.compile_store_name(stmt.name, stmt, scope, out)
            if scope.is_toplevel:
                if stmt.name in self.unit.functions:
                    self.error(f"duplicate function '{stmt.name}'", stmt)
                self.unit.functions[stmt.name] = entry
        elif isinstance(stmt, ast.Return):
            if scope.is_toplevel:
                self.error("'return' outside function", stmt)
            if stmt.value is not None:
                self.compile_expr(stmt.value, scope, out)
                self.emit(out, op.RET, node=stmt)
            else:
                self.emit(out, op.RETN, node=stmt)
        elif isinstance(stmt, ast.ExprStat):
            self.compile_expr(stmt.expr, scope, out)
            self.emit(out, op.POP, node=stmt)
        elif isinstance(stmt, ast.Block):
            for s in stmt.stmts:
                self.compile_stmt(s, scope, out)
        else:
            self.error(f"cannot compile statement {type(stmt).__name__}", stmt)

    def compile_assign(self, stmt, scope, out):
        target = stmt.target
        if isinstance(target, ast.Name):
            self.compile_expr(stmt.value, scope, out)
            self.compile_store_name(target.name, target, scope, out)
        elif isinstance(target, ast.Member):
            self.compile_expr(target.obj, scope, out)
            self.emit(out, op.PUSHS, self.intern(target.name), node=target)
            self.compile_expr(stmt.value, scope, out)
            self.emit(out, op.TSET, node=stmt)
        elif isinstance(target, ast.Index):
            self.compile_expr(target.obj, scope, out)
            self.compile_expr(target.key, scope, out)
            self.compile_expr(stmt.value, scope, out)
            self.emit(out, op.TSET, node=stmt)
        else:
            self.error("invalid assignment target", stmt)

    def compile_store_name(self, name, node, scope, out):
        if name == "self":
            self.error("cannot assign to 'self'", node)
        found = scope.resolve(name)
        if found is None:
            self.note_symbol(name, "global")
            self.emit(out, op.GSTORE, self.intern(name), node=node)
            return
        depth, slot, _ = found
        if depth == 0:
            self.emit(out, op.LSTORE, slot, node=node)
        else:
            self.emit(out, op.USTORE, depth, slot, node=node)

    # --- expressions ---

    def compile_expr(self, node, scope, out):
        if isinstance(node, ast.NilLit):
            self.emit(out, op.PUSHNIL, node=node)
        elif isinstance(node, ast.IntLit):
            v = node.value
            if INT32_MIN <= v <= INT32_MAX:
                self.emit(out, op.PUSHI, v, node=node)
            elif INT64_MIN <= v <= INT64_MAX:
                self.emit(out, op.PUSHC, self.const("i", v), node=node)
            else:
                self.error("integer literal out of 64-bit range", node)
        elif isinstance(node, ast.FloatLit):
            self.emit(out, op.PUSHC, self.const("f", node.value), node=node)
        elif isinstance(node, ast.StrLit):
            self.note_symbol(node.value, "string-const")
            self.emit(out, op.PUSHS, self.intern(node.value), node=node)
        elif isinstance(node, ast.Name):
            self.compile_load_name(node, scope, out)
        elif isinstance(node, ast.BinOp):
            self.compile_binop(node, scope, out)
        elif isinstance(node, ast.UnOp):
            self.compile_expr(node.operand, scope, out)
            self.emit(out, op.NEG if node.op == "-" else op.NOT, node=node)
        elif isinstance(node, ast.Member):
            self.compile_expr(node.obj, scope, out)
            self.emit(out, op.PUSHS, self.intern(node.name), node=node)
            self.emit(out, op.TGET, node=node)
        elif isinstance(node, ast.Index):
            self.compile_expr(node.obj, scope, out)
            self.compile_expr(node.key, scope, out)
            self.emit(out, op.TGET, node=node)
        elif isinstance(node, ast.Call):
            self.compile_expr(node.fn, scope, out)
            for arg in node.args:
                self.compile_expr(arg, scope, out)
            self.emit(out, op.CALL, len(node.args), node=node)
        elif isinstance(node, ast.MethodCall):
            self.compile_expr(node.obj, scope, out)
            self.emit(out, op.DUP, node=node)
            self.compile_expr(node.key, scope, out)
            self.emit(out, op.TGET, node=node)
            for arg in node.args:
                self.compile_expr(arg, scope, out)
            self.emit(out, op.CALLM, len(node.args), node=node)
        elif isinstance(node, ast.TableLit):
            self.emit(out, op.MKTABLE, node=node)
            for name, value in node.pairs:
                self.emit(out, op.DUP, node=node)
                self.emit(out, op.PUSHS, self.intern(name), node=node)
                self.compile_expr(value, scope, out)
                self.emit(out, op.TSET, node=node)
        elif isinstance(node, ast.FuncExpr):
            entry = Label()
            self._pending.append((node, scope, entry))
            self.emit(out, op.MKCLOSURE, entry, node=node)
        else:
            self.error(f"cannot compile expression {type(node).__name__}",
                       node)

    def compile_load_name(self, node, scope, out):
        name = node.name
        if name == "self" and scope.is_toplevel:
            self.error("'self' outside method position", node)
        found = scope.resolve(name)
        if found is None:
            self.note_symbol(name, "global")
            self.emit(out, op.GLOAD, self.intern(name), node=node)
            return
        depth, slot, _ = found
        if depth == 0:
            self.emit(out, op.LLOAD, slot, node=node)
        else:
            self.emit(out, op.ULOAD, depth, slot, node=node)

    _ARITH = {"+": op.ADD, "-": op.SUB, "*": op.MUL, "/": op.DIV,
              "%": op.MOD, "^": op.POW, "==": op.EQ, "!=": op.NEQ,
              "<": op.LT, "<=": op.LTE, ">": op.GT, ">=": op.GTE}

    def compile_binop(self, node, scope, out):
        if node.op == "and":
            l_end = Label()
            self.compile_expr(node.left, scope, out)
            self.emit(out, op.JFKEEP, l_end, node=node)
            self.compile_expr(node.right, scope, out)
            self.mark(out, l_end)
        elif node.op == "or":
            l_end = Label()
            self.compile_expr(node.left, scope, out)
            self.emit(out, op.JTKEEP, l_end, node=node)
            self.compile_expr(node.right, scope, out)
            self.mark(out, l_end)
        else:
            self.compile_expr(node.left, scope, out)
            self.compile_expr(node.right, scope, out)
            self.emit(out, self._ARITH[node.op], node=node)


def compile_source(text, origin="<script>"):
    """Compile source text to an ObjectUnit."""
    stmts = parse(text, origin)
    return Compiler(origin).compile_program(stmts)
