"""Wire message envelope and body codecs.

Envelope: <sender_id: u32, type: u8, body: bytes>, all little-endian.
Message types and body layouts are documented in docs/wire.md.  Values
travel as tagged primitives: nil, int64, float64, UTF-8 string, or a
table of tagged key/value pairs.
"""

import struct
from dataclasses import dataclass

from .errors import WireError
from .values import Table

MSG_ANNOUNCE = 0
MSG_SWARM_JOIN = 1
MSG_SWARM_LEAVE = 2
MSG_SWARM_LIST = 3
MSG_VSTIG_PUT = 4
MSG_VSTIG_GET = 5
MSG_BCAST = 6

TAG_NIL = 0
TAG_INT = 1
TAG_FLOAT = 2
TAG_STRING = 3
TAG_TABLE = 4


@dataclass(frozen=True)
class Announce:
    """Per-step id broadcast backing the neighbor structure."""


@dataclass(frozen=True)
class SwarmJoin:
    swarm_id: int


@dataclass(frozen=True)
class SwarmLeave:
    swarm_id: int


@dataclass
class SwarmList:
    swarm_ids: list  # complete membership of the sender


@dataclass(frozen=True)
class VstigPut:
    vstig_id: int
    key: object
    value: object
    timestamp: int
    robot_id: int


@dataclass(frozen=True)
class VstigGet:
    vstig_id: int
    key: object
    value: object
    timestamp: int
    robot_id: int


@dataclass(frozen=True)
class Broadcast:
    key: str
    value: object


@dataclass(frozen=True)
class Situated:
    """An inbox message plus the sensed relative position of its sender."""
    sender_id: int
    distance: float   # centimeters
    azimuth: float    # radians
    elevation: float  # radians
    message: object


def encode_value(v, depth=0):
    if depth > 16:
        raise WireError("value nesting too deep to encode")
    if v is None:
        return bytes([TAG_NIL])
    if type(v) is int:
        try:
            return struct.pack("<Bq", TAG_INT, v)
        except struct.error:
            raise WireError("integer out of 64-bit wire range")
    if type(v) is float:
        return struct.pack("<Bd", TAG_FLOAT, v)
    if type(v) is str:
        raw = v.encode("utf-8")
        return struct.pack("<BI", TAG_STRING, len(raw)) + raw
    if isinstance(v, Table):
        out = bytearray(struct.pack("<BI", TAG_TABLE, len(v.data)))
        for key, val in v.data.items():
            out += encode_value(key, depth + 1)
            out += encode_value(val, depth + 1)
        return bytes(out)
    raise WireError(f"value of type {type(v).__name__} is not serializable")


def decode_value(data, pos):
    if pos >= len(data):
        raise WireError("truncated value")
    tag = data[pos]
    pos += 1
    if tag == TAG_NIL:
        return None, pos
    if tag == TAG_INT:
        _need(data, pos, 8)
        return struct.unpack_from("<q", data, pos)[0], pos + 8
    if tag == TAG_FLOAT:
        _need(data, pos, 8)
        return struct.unpack_from("<d", data, pos)[0], pos + 8
    if tag == TAG_STRING:
        _need(data, pos, 4)
        n = struct.unpack_from("<I", data, pos)[0]
        _need(data, pos + 4, n)
        return data[pos + 4:pos + 4 + n].decode("utf-8"), pos + 4 + n
    if tag == TAG_TABLE:
        _need(data, pos, 4)
        n = struct.unpack_from("<I", data, pos)[0]
        pos += 4
        t = Table()
        for _ in range(n):
            key, pos = decode_value(data, pos)
            val, pos = decode_value(data, pos)
            t.set(key, val)
        return t, pos
    raise WireError(f"unknown value tag {tag}")


def _need(data, pos, n):
    if pos + n > len(data):
        raise WireError("truncated value")


def encode_message(sender_id, msg):
    """Encode envelope + body for one message."""
    if isinstance(msg, Announce):
        mtype, body = MSG_ANNOUNCE, b""
    elif isinstance(msg, SwarmJoin):
        mtype, body = MSG_SWARM_JOIN, _pack_swarm_id(msg.swarm_id)
    elif isinstance(msg, SwarmLeave):
        mtype, body = MSG_SWARM_LEAVE, _pack_swarm_id(msg.swarm_id)
    elif isinstance(msg, SwarmList):
        ids = sorted(msg.swarm_ids)
        if len(ids) > 255:
            raise WireError("too many swarms in list message")
        body = struct.pack("<B", len(ids))
        for sid in ids:
            body += _pack_swarm_id(sid)
        mtype = MSG_SWARM_LIST
    elif isinstance(msg, (VstigPut, VstigGet)):
        mtype = MSG_VSTIG_PUT if isinstance(msg, VstigPut) else MSG_VSTIG_GET
        if not 0 <= msg.vstig_id < 2 ** 16:
            raise WireError(f"stigmergy id {msg.vstig_id} out of range")
        if not 0 <= msg.timestamp < 2 ** 32:
            raise WireError("timestamp out of u32 range")
        body = struct.pack("<H", msg.vstig_id)
        body += encode_value(msg.key)
        body += encode_value(msg.value)
        body += struct.pack("<II", msg.timestamp, msg.robot_id)
    elif isinstance(msg, Broadcast):
        raw = msg.key.encode("utf-8")
        if len(raw) > 65535:
            raise WireError("broadcast key too long")
        body = struct.pack("<H", len(raw)) + raw + encode_value(msg.value)
        mtype = MSG_BCAST
    else:
        raise WireError(f"cannot encode message {type(msg).__name__}")
    return struct.pack("<IB", sender_id, mtype) + body


def _pack_swarm_id(sid):
    if not 0 <= sid < 2 ** 16:
        raise WireError(f"swarm id {sid} out of u16 range")
    return struct.pack("<H", sid)


def decode_message(data):
    """Decode one envelope; returns (sender_id, message)."""
    if len(data) < 5:
        raise WireError("truncated envelope")
    sender_id, mtype = struct.unpack_from("<IB", data, 0)
    pos = 5
    if mtype == MSG_ANNOUNCE:
        msg = Announce()
    elif mtype in (MSG_SWARM_JOIN, MSG_SWARM_LEAVE):
        _need(data, pos, 2)
        sid = struct.unpack_from("<H", data, pos)[0]
        pos += 2
        msg = SwarmJoin(sid) if mtype == MSG_SWARM_JOIN else SwarmLeave(sid)
    elif mtype == MSG_SWARM_LIST:
        _need(data, pos, 1)
        count = data[pos]
        pos += 1
        _need(data, pos, 2 * count)
        ids = list(struct.unpack_from(f"<{count}H", data, pos)) if count \
            else []
        pos += 2 * count
        msg = SwarmList(ids)
    elif mtype in (MSG_VSTIG_PUT, MSG_VSTIG_GET):
        _need(data, pos, 2)
        vid = struct.unpack_from("<H", data, pos)[0]
        pos += 2
        key, pos = decode_value(data, pos)
        value, pos = decode_value(data, pos)
        _need(data, pos, 8)
        ts, rid = struct.unpack_from("<II", data, pos)
        pos += 8
        cls = VstigPut if mtype == MSG_VSTIG_PUT else VstigGet
        msg = cls(vid, key, value, ts, rid)
    elif mtype == MSG_BCAST:
        _need(data, pos, 2)
        n = struct.unpack_from("<H", data, pos)[0]
        _need(data, pos + 2, n)
        key = data[pos + 2:pos + 2 + n].decode("utf-8")
        pos += 2 + n
        value, pos = decode_value(data, pos)
        msg = Broadcast(key, value)
    else:
        raise WireError(f"unknown message type {mtype}")
    if pos != len(data):
        raise WireError("trailing bytes after message body")
    return sender_id, msg
