"""Swarm membership: local flags, neighbor knowledge, queue optimization.

Membership changes queue JOIN/LEAVE messages; a periodic LIST message
carries the complete current membership.  Knowledge about neighbors ages
by one step per silent step and is forgotten past a threshold.  The
outbound queue is optimized on enqueue so that at most one message per
swarm id (or a single LIST subsuming everything) is ever in flight.
"""

from .errors import VmRuntimeError
from .values import HostClosure, NativeClosure, SwarmHandle, is_truthy
from .wire import SwarmJoin, SwarmLeave, SwarmList


class SwarmRegistry:
    def __init__(self, list_period=10, forget_threshold=50):
        self.flags = {}          # swarm_id -> 0/1
        self.neighbor_info = {}  # robot_id -> [set(swarm_ids), age]
        self.list_period = list_period
        self.forget_threshold = forget_threshold

    def create(self, swarm_id):
        self.flags.setdefault(swarm_id, 0)

    def is_member(self, swarm_id):
        return self.flags.get(swarm_id, 0) == 1

    def set_membership(self, swarm_id, member):
        """Set the local flag; returns the message to queue on change."""
        self.create(swarm_id)
        flag = 1 if member else 0
        if self.flags[swarm_id] == flag:
            return None
        self.flags[swarm_id] = flag
        return SwarmJoin(swarm_id) if flag else SwarmLeave(swarm_id)

    def membership_list(self):
        return sorted(sid for sid, flag in self.flags.items() if flag)

    def handle_message(self, sender_id, msg):
        """Ingest a JOIN/LEAVE/LIST from a neighbor; zeroes its age."""
        info = self.neighbor_info.get(sender_id)
        if info is None:
            info = [set(), 0]
            self.neighbor_info[sender_id] = info
        if isinstance(msg, SwarmJoin):
            info[0].add(msg.swarm_id)
        elif isinstance(msg, SwarmLeave):
            info[0].discard(msg.swarm_id)
        elif isinstance(msg, SwarmList):
            info[0] = set(msg.swarm_ids)
        info[1] = 0

    def on_step(self, step_count):
        """Age and prune neighbor knowledge; schedule the periodic LIST."""
        stale = []
        for rid, info in self.neighbor_info.items():
            info[1] += 1
            if info[1] > self.forget_threshold:
                stale.append(rid)
        for rid in stale:
            del self.neighbor_info[rid]
        if self.list_period > 0 and step_count % self.list_period == 0:
            return [SwarmList(self.membership_list())]
        return []

    def knows(self, robot_id):
        return robot_id in self.neighbor_info

    def swarms_of(self, robot_id):
        info = self.neighbor_info.get(robot_id)
        return info[0] if info is not None else None


def enqueue_swarm_message(queue, msg):
    """Apply the outbound-queue optimization rules for one new message.

    `queue` may contain non-swarm messages; only swarm messages are
    touched.  Mutates `queue` in place.
    """
    if isinstance(msg, SwarmList):
        queue[:] = [m for m in queue
                    if not isinstance(m, (SwarmJoin, SwarmLeave, SwarmList))]
        queue.append(msg)
        return
    sid = msg.swarm_id
    joins = [m for m in queue if isinstance(m, SwarmJoin) and m.swarm_id == sid]
    leaves = [m for m in queue
              if isinstance(m, SwarmLeave) and m.swarm_id == sid]
    lists = [m for m in queue if isinstance(m, SwarmList)]
    if isinstance(msg, SwarmJoin):
        if joins:
            return  # duplicate JOIN discarded
        if leaves:
            queue.remove(leaves[0])
            queue.append(msg)
            return
        if lists:
            if sid not in lists[0].swarm_ids:
                lists[0].swarm_ids.append(sid)
            return
        queue.append(msg)
    else:
        if leaves:
            return  # duplicate LEAVE discarded (mirror of the JOIN rule)
        if joins:
            queue.remove(joins[0])
            queue.append(msg)
            return
        if lists:
            if sid in lists[0].swarm_ids:
                lists[0].swarm_ids.remove(sid)
            return
        queue.append(msg)


def optimize_queue(messages):
    """Fold a raw oldest-first swarm message sequence through the
    enqueue-time optimization; returns the optimized queue."""
    queue = []
    for msg in messages:
        enqueue_swarm_message(queue, msg)
    return queue


def apply_to_view(view, msg):
    """Receiver-side effect of one swarm message on a membership set."""
    if isinstance(msg, SwarmJoin):
        view.add(msg.swarm_id)
    elif isinstance(msg, SwarmLeave):
        view.discard(msg.swarm_id)
    elif isinstance(msg, SwarmList):
        view.clear()
        view.update(msg.swarm_ids)
    return view


# --- script-facing methods -------------------------------------------------

def _require_closure(vm, v, what):
    if not isinstance(v, (NativeClosure, HostClosure)):
        raise VmRuntimeError(f"{what} expects a closure argument")
    return v


def _m_select(vm, handle, args):
    pred = args[0] if args else None
    if is_truthy(pred):
        vm.swarm_set_membership(handle.swarm_id, True)


def _m_unselect(vm, handle, args):
    pred = args[0] if args else None
    if is_truthy(pred):
        vm.swarm_set_membership(handle.swarm_id, False)


def _m_join(vm, handle, args):
    vm.swarm_set_membership(handle.swarm_id, True)


def _m_leave(vm, handle, args):
    vm.swarm_set_membership(handle.swarm_id, False)


def _m_in(vm, handle, args):
    return 1 if vm.swarm_registry.is_member(handle.swarm_id) else 0


def _m_exec(vm, handle, args):
    fn = _require_closure(vm, args[0] if args else None, "exec")
    if not vm.swarm_registry.is_member(handle.swarm_id):
        return None
    vm.swarm_stack.append(handle.swarm_id)
    try:
        vm.call_value(fn, [])
    finally:
        vm.swarm_stack.pop()


def _m_others(vm, handle, args):
    if not args or type(args[0]) is not int:
        raise VmRuntimeError("others expects a new swarm id")
    new_id = args[0]
    member = not vm.swarm_registry.is_member(handle.swarm_id)
    return vm.swarm_create(new_id, member)


SwarmHandle.METHODS = {
    "select": HostClosure("select", _m_select),
    "unselect": HostClosure("unselect", _m_unselect),
    "join": HostClosure("join", _m_join),
    "leave": HostClosure("leave", _m_leave),
    "in": HostClosure("in", _m_in),
    "exec": HostClosure("exec", _m_exec),
    "others": HostClosure("others", _m_others),
}


def _f_create(vm, _self, args):
    if not args or type(args[0]) is not int:
        raise VmRuntimeError("swarm.create expects an integer id")
    return vm.swarm_create(args[0])


def _setop(vm, args, op, name):
    if len(args) != 3 or type(args[0]) is not int:
        raise VmRuntimeError(f"swarm.{name} expects (new_id, a, b)")
    new_id, a, b = args
    if not isinstance(a, SwarmHandle) or not isinstance(b, SwarmHandle):
        raise VmRuntimeError(f"swarm.{name} expects swarm arguments")
    reg = vm.swarm_registry
    fa, fb = reg.is_member(a.swarm_id), reg.is_member(b.swarm_id)
    return vm.swarm_create(new_id, op(fa, fb))


def _f_intersection(vm, _self, args):
    return _setop(vm, args, lambda a, b: a and b, "intersection")


def _f_union(vm, _self, args):
    return _setop(vm, args, lambda a, b: a or b, "union")


def _f_difference(vm, _self, args):
    return _setop(vm, args, lambda a, b: a and not b, "difference")


def _f_id(vm, _self, args):
    stack = vm.swarm_stack
    if not stack:
        return None
    n = args[0] if args else 0
    if type(n) is not int or n < 0:
        raise VmRuntimeError("swarm.id expects a non-negative integer")
    if n >= len(stack):
        return None
    return stack[-1 - n]


FACTORY_METHODS = {
    "create": HostClosure("create", _f_create),
    "intersection": HostClosure("intersection", _f_intersection),
    "union": HostClosure("union", _f_union),
    "difference": HostClosure("difference", _f_difference),
    "id": HostClosure("id", _f_id),
}
