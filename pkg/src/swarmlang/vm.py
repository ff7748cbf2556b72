"""Stack-based virtual machine executing one robot's bytecode image.

A step runs the five-phase cycle: the host writes sensor state before the
call (phase 1), `step(inbox)` ingests messages into the neighbor, swarm
and stigmergy subsystems (phase 2), executes the script (phase 3: the
whole top level on the first step, then `init` once, then `step` each
step), drains the outbound queue up to the payload budget preserving
order (phase 4), and returns the actuation snapshot collected from
actuator bindings (phase 5).

Runtime errors fault the VM: the error (with source position recovered
from the image debug map) is stored and every later step is a no-op.
"""

import builtins
import math as _math
from dataclasses import dataclass

from . import opcodes as op
from .errors import VmError, VmRuntimeError, WireError
from .image import decode_instructions
from .neighbors import make_view, record_table
from .swarms import FACTORY_METHODS as SWARM_FACTORY
from .swarms import SwarmRegistry, enqueue_swarm_message
from .values import (HostClosure, NativeClosure, SwarmHandle, Table,
                     VStigHandle, arith_add, arith_div, arith_mod, arith_mul,
                     arith_neg, arith_pow, arith_sub, check_key, coerce,
                     copy_value, is_number, is_truthy, to_display, type_name,
                     value_eq, value_lt, value_lte)
from .vstig import FACTORY_METHODS as VSTIG_FACTORY
from .vstig import VStigMap, enqueue_vstig_message
from .wire import (Announce, Broadcast, SwarmJoin, SwarmLeave, SwarmList,
                   VstigGet, VstigPut, encode_message)


@dataclass
class VmConfig:
    payload_budget: int = 200        # bytes sent per step
    list_period: int = 10            # steps between SWARM_LIST refreshes
    forget_threshold: int = 50       # steps before neighbor info is dropped
    max_frames: int = 200
    instruction_budget: int = 5_000_000  # per step; guards runaway loops
    optimize_vstig_queue: bool = True    # off only for equivalence testing


@dataclass
class SentMessage:
    message: object
    raw: bytes


class _Program:
    """Image code decoded to an indexed instruction list.

    Jump operands become instruction indices, string/const operands become
    the actual values, and MKCLOSURE operands become (entry, nparams,
    nlocals) prototypes, so the dispatch loop never touches the pools.
    """

    def __init__(self, image):
        self.image = image
        raw = decode_instructions(image.code)
        off2idx = {offset: i for i, (offset, _, _) in enumerate(raw)}
        self.offsets = [offset for offset, _, _ in raw]
        headers = {}  # FUNC index -> (nparams, nlocals)
        for i, (offset, opcode, args) in enumerate(raw):
            if opcode == op.FUNC:
                headers[i] = args
        instrs = []
        for offset, opcode, args in raw:
            kinds = op.OPERANDS[opcode]
            vals = []
            for kind, arg in zip(kinds, args):
                if kind == "j":
                    if arg not in off2idx:
                        raise VmError(f"jump target {arg} is not an "
                                      "instruction boundary")
                    vals.append(off2idx[arg])
                elif kind == "s":
                    vals.append(image.strings[arg])
                elif kind == "c":
                    vals.append(image.consts[arg][1])
                else:
                    vals.append(arg)
            if opcode == op.MKCLOSURE:
                target = vals[0]
                if target not in headers:
                    raise VmError("closure target is not a function header")
                nparams, nlocals = headers[target]
                vals = [(target + 1, nparams, nlocals)]
            instrs.append((opcode, tuple(vals)))
        self.instrs = instrs
        self.functions = {}
        for name_idx, offset in image.functions:
            if offset in off2idx:
                self.functions[image.strings[name_idx]] = off2idx[offset]

    def position_at_index(self, idx):
        if 0 <= idx < len(self.offsets):
            return self.image.position_at(self.offsets[idx])
        return None


_PROGRAM_CACHE = {}


def _program_for(image):
    prog = _PROGRAM_CACHE.get(id(image))
    if prog is None or prog.image is not image:
        prog = _Program(image)
        _PROGRAM_CACHE[id(image)] = prog
    return prog


class _Frame:
    __slots__ = ("ip", "locals", "env", "base")

    def __init__(self, ip, locals_, env, base):
        self.ip = ip
        self.locals = locals_
        self.env = env
        self.base = base


def _hc_print(vm, _self, args):
    vm.print_sink("".join(to_display(a) for a in args))


def _num(args, i, name):
    if i >= len(args) or not is_number(args[i]):
        raise VmRuntimeError(f"math.{name} expects numeric arguments")
    return args[i]


_MATH_METHODS = {
    "sin": HostClosure("sin", lambda vm, s, a: _math.sin(_num(a, 0, "sin"))),
    "cos": HostClosure("cos", lambda vm, s, a: _math.cos(_num(a, 0, "cos"))),
    "min": HostClosure("min", lambda vm, s, a: min(_num(a, 0, "min"),
                                                   _num(a, 1, "min"))),
    "abs": HostClosure("abs", lambda vm, s, a: abs(_num(a, 0, "abs"))),
    "sqrt": HostClosure("sqrt", lambda vm, s, a: _sqrt(_num(a, 0, "sqrt"))),
}


def _sqrt(x):
    if x < 0:
        raise VmRuntimeError("math.sqrt of a negative number")
    return _math.sqrt(x)


class Vm:
    def __init__(self, image, robot_id, config=None, print_sink=None):
        if type(robot_id) is not int or not 0 <= robot_id < 2 ** 32:
            raise VmError(f"robot id must be a u32, got {robot_id!r}")
        self.image = image
        self.program = _program_for(image)
        self.robot_id = robot_id
        self.config = config or VmConfig()
        self.print_sink = print_sink or builtins.print

        self.globals = {}
        self.frames = []
        self.stack = []
        self.swarm_stack = []
        self.step_count = 0
        self.faulted = None
        self.out_queue = []
        self.actuation = {}
        self.listeners = {}
        self._fuel = 0
        self._destroyed = False

        self.swarm_registry = SwarmRegistry(self.config.list_period,
                                            self.config.forget_threshold)
        self._swarm_handles = {}
        self._vstigs = {}
        self._vstig_handles = {}
        self.neighbor_view = make_view({})

        self.globals["id"] = robot_id
        self.globals["math"] = Table(dict(_MATH_METHODS))
        self.globals["print"] = HostClosure("print", _hc_print)
        self.globals["swarm"] = Table(dict(SWARM_FACTORY))
        self.globals["stigmergy"] = Table(dict(VSTIG_FACTORY))
        self.globals["neighbors"] = self.neighbor_view
        self.builtin_names = set(self.globals)

    # --- host API -----------------------------------------------------

    def register_function(self, name, fn, actuator=False):
        """Expose a host function to the script as a global closure.

        `fn(vm, args)` may return a value (None becomes nil).  With
        actuator=True each call is recorded in the per-step actuation
        snapshot.  Must be called before the first step.
        """
        if self.step_count != 0:
            raise VmError("host functions must be registered before the "
                          "first step")
        if name in self.globals:
            raise VmError(f"global '{name}' already exists")

        def call(vm, _self, args):
            if actuator:
                vm.actuation[name] = tuple(args)
            return fn(vm, list(args))

        self.globals[name] = HostClosure(name, call)
        self.builtin_names.add(name)

    def set_table(self, name, entries):
        """(Re)bind global `name` to a fresh table built from entries."""
        t = Table()
        for key, value in entries:
            t.set(coerce(key), coerce(value))
        self.globals[name] = t

    def set_global(self, name, value):
        self.globals[name] = coerce(value)

    def get_global(self, name):
        return self.globals.get(name)

    def script_globals(self):
        """Globals created by the script (builtins and bindings excluded)."""
        return {k: v for k, v in self.globals.items()
                if k not in self.builtin_names}

    def call_function(self, name, args=()):
        """Call a script global by name; the host-facing entry point."""
        if self.faulted:
            raise VmError(f"VM is faulted: {self.faulted}")
        fn = self.globals.get(name)
        if not isinstance(fn, (NativeClosure, HostClosure)):
            raise VmError(f"global '{name}' is not a closure")
        if self._fuel <= 0:
            self._fuel = self.config.instruction_budget
        return self.call_value(fn, [coerce(a) for a in args])

    def destroy(self):
        """Run the script's `destroy` entry point, if any, once."""
        if self._destroyed or self.faulted:
            return
        self._destroyed = True
        fn = self.globals.get("destroy")
        if isinstance(fn, (NativeClosure, HostClosure)):
            if self._fuel <= 0:
                self._fuel = self.config.instruction_budget
            self.call_value(fn, [])

    # --- protocol plumbing ---------------------------------------------

    def swarm_create(self, swarm_id, member=False):
        if not 0 <= swarm_id < 2 ** 16:
            raise VmRuntimeError(f"swarm id {swarm_id} out of range")
        self.swarm_registry.create(swarm_id)
        handle = self._swarm_handles.get(swarm_id)
        if handle is None:
            handle = SwarmHandle(swarm_id)
            self._swarm_handles[swarm_id] = handle
        if member:
            self.swarm_set_membership(swarm_id, True)
        return handle

    def swarm_set_membership(self, swarm_id, member):
        msg = self.swarm_registry.set_membership(swarm_id, member)
        if msg is not None:
            enqueue_swarm_message(self.out_queue, msg)

    def vstig_create(self, vstig_id):
        if not 0 <= vstig_id < 2 ** 16:
            raise VmRuntimeError(f"stigmergy id {vstig_id} out of range")
        if vstig_id not in self._vstigs:
            self._vstigs[vstig_id] = VStigMap(vstig_id)
            self._vstig_handles[vstig_id] = VStigHandle(vstig_id)
        return self._vstig_handles[vstig_id]

    def vstig_map(self, vstig_id):
        if vstig_id not in self._vstigs:
            self._vstigs[vstig_id] = VStigMap(vstig_id)
        return self._vstigs[vstig_id]

    def enqueue_vstig(self, msg):
        if self.config.optimize_vstig_queue:
            enqueue_vstig_message(self.out_queue, msg)
        else:
            self.out_queue.append(msg)

    def enqueue_broadcast(self, msg):
        # one queued message per key; the most recent wins
        self.out_queue[:] = [m for m in self.out_queue
                             if not (isinstance(m, Broadcast) and
                                     m.key == msg.key)]
        self.out_queue.append(Broadcast(msg.key, copy_value(msg.value)))

    # --- the step cycle --------------------------------------------------

    def step(self, inbox=()):
        """Run one VM step; returns (outbox, actuation snapshot)."""
        if self.faulted:
            return [], {}
        self.step_count += 1
        self._fuel = self.config.instruction_budget
        self.actuation = {}
        try:
            self._ingest(inbox)
            self._execute()
        except VmRuntimeError as exc:
            self.faulted = exc
            return [], {}
        outbox = self._drain()
        snapshot = self.actuation
        self.actuation = {}
        return outbox, snapshot

    def _ingest(self, inbox):
        # phase 2: rebuild the neighbor view from every sender heard this
        # step, then apply messages to the subsystems in arrival order
        records = {}
        for sm in inbox:
            records[sm.sender_id] = record_table(sm.distance, sm.azimuth,
                                                 sm.elevation)
        self.neighbor_view = make_view(records)
        self.globals["neighbors"] = self.neighbor_view

        for msg in self.swarm_registry.on_step(self.step_count):
            enqueue_swarm_message(self.out_queue, msg)

        for sm in inbox:
            msg = sm.message
            if isinstance(msg, (SwarmJoin, SwarmLeave, SwarmList)):
                self.swarm_registry.handle_message(sm.sender_id, msg)
            elif isinstance(msg, VstigPut):
                vstig = self._vstigs.get(msg.vstig_id)
                if vstig is not None:
                    for out in vstig.on_put(msg, self):
                        self.enqueue_vstig(out)
            elif isinstance(msg, VstigGet):
                vstig = self._vstigs.get(msg.vstig_id)
                if vstig is not None:
                    for out in vstig.on_get(msg, self):
                        self.enqueue_vstig(out)
            elif isinstance(msg, Broadcast):
                listener = self.listeners.get(msg.key)
                if listener is not None:
                    self.call_value(listener, [msg.key,
                                               copy_value(msg.value),
                                               sm.sender_id])

    def _execute(self):
        # phase 3
        if self.step_count == 1:
            self._run_toplevel()
            init = self.globals.get("init")
            if isinstance(init, (NativeClosure, HostClosure)):
                self.call_value(init, [])
        step_fn = self.globals.get("step")
        if isinstance(step_fn, (NativeClosure, HostClosure)):
            self.call_value(step_fn, [])

    def _drain(self):
        # phase 4: longest prefix of [announce] + queue that fits
        budget = self.config.payload_budget
        outbox = []
        announce = Announce()
        try:
            raw = encode_message(self.robot_id, announce)
        except WireError as exc:  # pragma: no cover - announce is tiny
            raise VmRuntimeError(str(exc))
        if len(raw) > budget:
            return outbox
        outbox.append(SentMessage(announce, raw))
        budget -= len(raw)
        while self.out_queue:
            msg = self.out_queue[0]
            try:
                raw = encode_message(self.robot_id, msg)
            except WireError as exc:
                self.faulted = VmRuntimeError(
                    f"cannot serialize outbound message: {exc}")
                return outbox
            if len(raw) > budget:
                break
            self.out_queue.pop(0)
            outbox.append(SentMessage(msg, raw))
            budget -= len(raw)
        return outbox

    # --- interpreter ------------------------------------------------------

    def _run_toplevel(self):
        root = _Frame(0, [None], (), len(self.stack))
        self.frames.append(root)
        self._run(len(self.frames) - 1)

    def call_value(self, fn, args, self_val=None):
        """Synchronously call a closure value; returns its result."""
        floor = len(self.frames)
        stack_floor = len(self.stack)
        try:
            self._invoke(fn, self_val, args)
            if len(self.frames) > floor:
                self._run(floor)
            return self.stack.pop()
        except BaseException:
            del self.frames[floor:]
            del self.stack[stack_floor:]
            raise

    def _invoke(self, fn, self_val, args):
        if isinstance(fn, NativeClosure):
            if len(self.frames) >= self.config.max_frames:
                raise VmRuntimeError("stack overflow")
            nlocals = fn.nlocals
            locals_ = [None] * max(nlocals, len(args) + 1)
            locals_[0] = self_val
            take = min(len(args), fn.nparams)
            for i in range(take):
                locals_[i + 1] = args[i]
            self.frames.append(_Frame(fn.entry, locals_, fn.env,
                                      len(self.stack)))
        elif isinstance(fn, HostClosure):
            result = fn.fn(self, self_val, args)
            self.stack.append(coerce(result))
        else:
            raise VmRuntimeError(f"called a {type_name(fn)} value")

    def _run(self, floor):
        try:
            self._run_inner(floor)
        except VmRuntimeError as exc:
            if exc.line is None and self.frames:
                pos = self.program.position_at_index(self.frames[-1].ip - 1)
                if pos:
                    raise VmRuntimeError(exc.message, pos[1], pos[2],
                                         pos[0]) from None
            raise

    def _run_inner(self, floor):
        frames = self.frames
        stack = self.stack
        instrs = self.program.instrs
        fuel = self._fuel
        try:
            while len(frames) > floor:
                frame = frames[-1]
                opcode, args = instrs[frame.ip]
                frame.ip += 1
                fuel -= 1
                if fuel <= 0:
                    raise VmRuntimeError("instruction budget exceeded")

                if opcode == op.LLOAD:
                    stack.append(frame.locals[args[0]])
                elif opcode == op.PUSHI or opcode == op.PUSHC or \
                        opcode == op.PUSHS:
                    stack.append(args[0])
                elif opcode == op.PUSHNIL:
                    stack.append(None)
                elif opcode == op.GLOAD:
                    stack.append(self.globals.get(args[0]))
                elif opcode == op.GSTORE:
                    self.globals[args[0]] = stack.pop()
                elif opcode == op.LSTORE:
                    frame.locals[args[0]] = stack.pop()
                elif opcode == op.ULOAD:
                    stack.append(frame.env[args[0] - 1][args[1]])
                elif opcode == op.USTORE:
                    frame.env[args[0] - 1][args[1]] = stack.pop()
                elif opcode == op.ADD:
                    b = stack.pop()
                    stack[-1] = arith_add(stack[-1], b)
                elif opcode == op.SUB:
                    b = stack.pop()
                    stack[-1] = arith_sub(stack[-1], b)
                elif opcode == op.MUL:
                    b = stack.pop()
                    stack[-1] = arith_mul(stack[-1], b)
                elif opcode == op.DIV:
                    b = stack.pop()
                    stack[-1] = arith_div(stack[-1], b)
                elif opcode == op.MOD:
                    b = stack.pop()
                    stack[-1] = arith_mod(stack[-1], b)
                elif opcode == op.POW:
                    b = stack.pop()
                    stack[-1] = arith_pow(stack[-1], b)
                elif opcode == op.NEG:
                    stack[-1] = arith_neg(stack[-1])
                elif opcode == op.NOT:
                    stack[-1] = 0 if is_truthy(stack[-1]) else 1
                elif opcode == op.EQ:
                    b = stack.pop()
                    stack[-1] = 1 if value_eq(stack[-1], b) else 0
                elif opcode == op.NEQ:
                    b = stack.pop()
                    stack[-1] = 0 if value_eq(stack[-1], b) else 1
                elif opcode == op.LT:
                    b = stack.pop()
                    stack[-1] = 1 if value_lt(stack[-1], b) else 0
                elif opcode == op.LTE:
                    b = stack.pop()
                    stack[-1] = 1 if value_lte(stack[-1], b) else 0
                elif opcode == op.GT:
                    b = stack.pop()
                    stack[-1] = 1 if value_lt(b, stack[-1]) else 0
                elif opcode == op.GTE:
                    b = stack.pop()
                    stack[-1] = 1 if value_lte(b, stack[-1]) else 0
                elif opcode == op.JUMP:
                    frame.ip = args[0]
                elif opcode == op.JUMPF:
                    if not is_truthy(stack.pop()):
                        frame.ip = args[0]
                elif opcode == op.JFKEEP:
                    if is_truthy(stack[-1]):
                        stack.pop()
                    else:
                        frame.ip = args[0]
                elif opcode == op.JTKEEP:
                    if is_truthy(stack[-1]):
                        frame.ip = args[0]
                    else:
                        stack.pop()
                elif opcode == op.MKTABLE:
                    stack.append(Table())
                elif opcode == op.TGET:
                    key = stack.pop()
                    obj = stack.pop()
                    if isinstance(obj, Table):
                        check_key(key)
                        stack.append(obj.get(key))
                    elif isinstance(obj, (SwarmHandle, VStigHandle)):
                        method = type(obj).METHODS.get(key) \
                            if type(key) is str else None
                        stack.append(method)
                    else:
                        raise VmRuntimeError(
                            f"indexing a {type_name(obj)} value")
                elif opcode == op.TSET:
                    value = stack.pop()
                    key = stack.pop()
                    obj = stack.pop()
                    if not isinstance(obj, Table):
                        raise VmRuntimeError(
                            f"cannot write into a {type_name(obj)} value")
                    obj.set(key, value)
                elif opcode == op.MKCLOSURE:
                    entry, nparams, nlocals = args[0]
                    stack.append(NativeClosure(
                        entry, nparams, nlocals,
                        (frame.locals,) + frame.env))
                elif opcode == op.CALL or opcode == op.CALLM:
                    argc = args[0]
                    if argc:
                        call_args = stack[-argc:]
                        del stack[-argc:]
                    else:
                        call_args = []
                    fn = stack.pop()
                    self_val = stack.pop() if opcode == op.CALLM else None
                    self._fuel = fuel
                    self._invoke(fn, self_val, call_args)
                    fuel = self._fuel
                elif opcode == op.RET:
                    value = stack.pop()
                    done = frames.pop()
                    del stack[done.base:]
                    stack.append(value)
                elif opcode == op.RETN:
                    done = frames.pop()
                    del stack[done.base:]
                    stack.append(None)
                elif opcode == op.POP:
                    stack.pop()
                elif opcode == op.DUP:
                    stack.append(stack[-1])
                elif opcode == op.DONE:
                    done = frames.pop()
                    del stack[done.base:]
                elif opcode == op.NOP:
                    pass
                elif opcode == op.FUNC:
                    raise VmRuntimeError("fell through into a function body")
                else:  # pragma: no cover
                    raise VmRuntimeError(f"unknown opcode {opcode}")
        finally:
            self._fuel = fuel


def vm_create(image, robot_id, config=None, print_sink=None):
    """Create a VM bound to a robot id; top-level code runs on first step."""
    return Vm(image, robot_id, config, print_sink)
