"""Instruction set shared by the compiler, image codec, disassembler and VM.

Encoding: one u8 opcode followed by zero or more little-endian 32-bit
operands.  Operand kinds only matter for disassembly comments and for
validating jump targets; the byte layout is the same for all of them.
See docs/bytecode.md for the full image format.
"""

# opcode numbers are part of the image format; do not renumber
NOP = 0
DONE = 1
PUSHNIL = 2
PUSHI = 3       # i32 immediate integer
PUSHC = 4       # u32 constant-pool index (int64 / float64)
PUSHS = 5       # u32 string-table index
POP = 6
DUP = 7
ADD = 8
SUB = 9
MUL = 10
DIV = 11
MOD = 12
POW = 13
NEG = 14
NOT = 15
EQ = 16
NEQ = 17
LT = 18
LTE = 19
GT = 20
GTE = 21
JUMP = 22       # u32 absolute code offset
JUMPF = 23      # pop; jump if falsy
JFKEEP = 24     # jump if falsy keeping the value, else pop (for `and`)
JTKEEP = 25     # jump if truthy keeping the value, else pop (for `or`)
GLOAD = 26      # u32 string index: load global by name
GSTORE = 27
LLOAD = 28      # u32 local slot
LSTORE = 29
ULOAD = 30      # u32 depth, u32 slot: load from an enclosing function frame
USTORE = 31
MKTABLE = 32
TGET = 33       # (table, key) -> value
TSET = 34       # (table, key, value) ->
MKCLOSURE = 35  # u32 code offset of a FUNC header
CALL = 36       # u32 argc; stack: fn, arg1..argn
CALLM = 37      # u32 argc; stack: receiver, fn, arg1..argn
RET = 38        # return top of stack
RETN = 39       # return nil
FUNC = 40       # u32 nparams, u32 nlocals: function prologue marker

# operand kinds: "i" signed imm, "u" unsigned imm, "s" string index,
# "c" const index, "j" jump target (code offset)
_SPEC = {
    NOP: ("NOP", ""),
    DONE: ("DONE", ""),
    PUSHNIL: ("PUSHNIL", ""),
    PUSHI: ("PUSHI", "i"),
    PUSHC: ("PUSHC", "c"),
    PUSHS: ("PUSHS", "s"),
    POP: ("POP", ""),
    DUP: ("DUP", ""),
    ADD: ("ADD", ""),
    SUB: ("SUB", ""),
    MUL: ("MUL", ""),
    DIV: ("DIV", ""),
    MOD: ("MOD", ""),
    POW: ("POW", ""),
    NEG: ("NEG", ""),
    NOT: ("NOT", ""),
    EQ: ("EQ", ""),
    NEQ: ("NEQ", ""),
    LT: ("LT", ""),
    LTE: ("LTE", ""),
    GT: ("GT", ""),
    GTE: ("GTE", ""),
    JUMP: ("JUMP", "j"),
    JUMPF: ("JUMPF", "j"),
    JFKEEP: ("JFKEEP", "j"),
    JTKEEP: ("JTKEEP", "j"),
    GLOAD: ("GLOAD", "s"),
    GSTORE: ("GSTORE", "s"),
    LLOAD: ("LLOAD", "u"),
    LSTORE: ("LSTORE", "u"),
    ULOAD: ("ULOAD", "uu"),
    USTORE: ("USTORE", "uu"),
    MKTABLE: ("MKTABLE", ""),
    TGET: ("TGET", ""),
    TSET: ("TSET", ""),
    MKCLOSURE: ("MKCLOSURE", "j"),
    CALL: ("CALL", "u"),
    CALLM: ("CALLM", "u"),
    RET: ("RET", ""),
    RETN: ("RETN", ""),
    FUNC: ("FUNC", "uu"),
}

NAMES = {op: name for op, (name, _) in _SPEC.items()}
OPERANDS = {op: kinds for op, (_, kinds) in _SPEC.items()}
BY_NAME = {name: op for op, name in NAMES.items()}


def size_of(op):
    """Encoded size in bytes of one instruction."""
    return 1 + 4 * len(OPERANDS[op])
