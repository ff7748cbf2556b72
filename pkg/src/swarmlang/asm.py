"""Textual disassembly of a bytecode image, and its inverse.

The listing is lossless: `assemble(disassemble(img))` reproduces the
image byte for byte.  Everything after `;` on a line is a comment and is
ignored by the assembler.
"""

from . import opcodes as op
from .errors import AsmError, ImageError
from .image import BytecodeImage, decode_instructions, encode_instruction


def disassemble(img):
    """Render an image as a re-assemblable plain-text listing."""
    lines = [f".image {img.version}"]
    for i, s in enumerate(img.strings):
        lines.append(f".string {i} {_quote(s)}")
    for i, (tag, value) in enumerate(img.consts):
        lines.append(f".const {i} {tag} {value!r}")
    for name_idx, offset in img.functions:
        lines.append(f".function {name_idx} @{offset}"
                     f" ; {img.strings[name_idx]}")
    for offset, line, col, oidx in img.debug:
        lines.append(f".debug @{offset} {line}:{col} {oidx}")
    positions = {offset: (line, col) for offset, line, col, _ in img.debug}
    lines.append(f".code {len(img.code)}")
    for offset, opcode, args in decode_instructions(img.code):
        text = f"@{offset} {op.NAMES[opcode]}"
        for kind, arg in zip(op.OPERANDS[opcode], args):
            text += f" {arg}"
        comment = _comment_for(img, opcode, args)
        if offset in positions:
            line, col = positions[offset]
            comment = f"{comment + ' ' if comment else ''}({line}:{col})"
        if comment:
            text += f" ; {comment}"
        lines.append(text)
    return "\n".join(lines) + "\n"


def _comment_for(img, opcode, args):
    kinds = op.OPERANDS[opcode]
    notes = []
    for kind, arg in zip(kinds, args):
        if kind == "s" and arg < len(img.strings):
            notes.append(_quote(img.strings[arg]))
        elif kind == "c" and arg < len(img.consts):
            notes.append(repr(img.consts[arg][1]))
    return " ".join(notes)


def assemble(text):
    """Parse a disassembly listing back into a BytecodeImage."""
    version = None
    strings = {}
    consts = {}
    functions = []
    debug = []
    code_len = None
    instrs = []  # (offset, opcode, args)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        parts = line.split(None, 2) if line.startswith(".string") \
            else line.split()
        head = parts[0]
        try:
            if head == ".image":
                version = int(parts[1])
            elif head == ".string":
                idx = int(parts[1])
                strings[idx] = _unquote(parts[2].strip(), lineno)
            elif head == ".const":
                idx, tag, literal = int(parts[1]), parts[2], parts[3]
                if tag == "i":
                    consts[idx] = ("i", int(literal))
                elif tag == "f":
                    consts[idx] = ("f", float(literal))
                else:
                    raise AsmError(f"unknown const tag {tag!r}", lineno)
            elif head == ".function":
                functions.append((int(parts[1]), _offset(parts[2], lineno)))
            elif head == ".debug":
                offset = _offset(parts[1], lineno)
                line_s, col_s = parts[2].split(":")
                debug.append((offset, int(line_s), int(col_s), int(parts[3])))
            elif head == ".code":
                code_len = int(parts[1])
            elif head.startswith("@"):
                offset = _offset(head, lineno)
                name = parts[1]
                if name not in op.BY_NAME:
                    raise AsmError(f"unknown opcode {name!r}", lineno)
                opcode = op.BY_NAME[name]
                kinds = op.OPERANDS[opcode]
                raw_args = parts[2:2 + len(kinds)]
                if len(raw_args) != len(kinds):
                    raise AsmError(f"{name} needs {len(kinds)} operand(s)",
                                   lineno)
                instrs.append((offset, opcode, tuple(int(a) for a in raw_args)))
            else:
                raise AsmError(f"unknown directive {head!r}", lineno)
        except AsmError:
            raise
        except (ValueError, IndexError) as exc:
            raise AsmError(f"malformed line: {exc}", lineno)

    if version is None:
        raise AsmError("missing .image directive")
    if code_len is None:
        raise AsmError("missing .code directive")

    code = bytearray()
    for offset, opcode, args in sorted(instrs):
        if offset != len(code):
            raise AsmError(f"instruction at @{offset} does not follow the "
                           f"previous one (expected @{len(code)})")
        code += encode_instruction(opcode, args)
    if len(code) != code_len:
        raise AsmError(f"code length {len(code)} != declared {code_len}")

    for table, label in ((strings, ".string"), (consts, ".const")):
        missing = set(range(len(table))) - set(table)
        if missing:
            raise AsmError(f"{label} indices not contiguous: missing "
                           f"{sorted(missing)}")

    img = BytecodeImage(
        version=version,
        strings=[strings[i] for i in range(len(strings))],
        consts=[consts[i] for i in range(len(consts))],
        functions=functions,
        debug=debug,
        code=bytes(code),
    )
    if version != img.version:
        raise ImageError(f"unsupported image version {version}")
    img.validate()
    return img


def _strip_comment(line):
    in_string = False
    i = 0
    while i < len(line):
        c = line[i]
        if in_string:
            if c == "\\":
                i += 1
            elif c == '"':
                in_string = False
        elif c == '"':
            in_string = True
        elif c == ";":
            return line[:i]
        i += 1
    return line


def _offset(token, lineno):
    if not token.startswith("@"):
        raise AsmError(f"expected @offset, got {token!r}", lineno)
    return int(token[1:])


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _quote(s):
    return '"' + "".join(_ESCAPES.get(c, c) for c in s) + '"'


def _unquote(token, lineno):
    if len(token) < 2 or not token.startswith('"') or not token.endswith('"'):
        raise AsmError(f"malformed string literal {token}", lineno)
    body = token[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            if i + 1 >= len(body):
                raise AsmError("dangling escape in string", lineno)
            nxt = body[i + 1]
            rev = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}
            if nxt not in rev:
                raise AsmError(f"unknown escape \\{nxt}", lineno)
            out.append(rev[nxt])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)
