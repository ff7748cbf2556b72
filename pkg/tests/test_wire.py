import pytest

from swarmlang.errors import WireError
from swarmlang.values import Table
from swarmlang.wire import (Announce, Broadcast, SwarmJoin, SwarmLeave,
                            SwarmList, VstigGet, VstigPut, decode_message,
                            encode_message)


def round_trip(sender, msg):
    data = encode_message(sender, msg)
    got_sender, got = decode_message(data)
    assert got_sender == sender
    return got


def test_announce_is_envelope_only():
    data = encode_message(9, Announce())
    assert len(data) == 5  # u32 sender + u8 type
    assert isinstance(round_trip(9, Announce()), Announce)


def test_swarm_join_leave():
    assert round_trip(1, SwarmJoin(42)) == SwarmJoin(42)
    assert round_trip(1, SwarmLeave(42)) == SwarmLeave(42)


def test_swarm_list_sorted_on_wire():
    got = round_trip(1, SwarmList([5, 2, 9]))
    assert got.swarm_ids == [2, 5, 9]


def test_vstig_put_with_primitive_values():
    msg = VstigPut(3, "key", 1.5, 7, 11)
    assert round_trip(2, msg) == msg


def test_vstig_get_with_absent_entry():
    msg = VstigGet(3, 44, None, 0, 0)
    got = round_trip(2, msg)
    assert got.value is None and got.timestamp == 0


def test_vstig_int_key():
    msg = VstigPut(1, 17, 1, 1, 17)
    assert round_trip(17, msg) == msg


def test_broadcast_with_table_value():
    t = Table({"dist": 10.5, "color": 2, 1: "one"})
    got = round_trip(4, Broadcast("targetdata", t))
    assert got.key == "targetdata"
    assert got.value.get("dist") == 10.5
    assert got.value.get("color") == 2
    assert got.value.get(1) == "one"


def test_nested_table_value():
    inner = Table({"x": 1})
    got = round_trip(0, Broadcast("t", Table({"in": inner})))
    assert got.value.get("in").get("x") == 1


def test_unicode_strings():
    got = round_trip(0, Broadcast("clé", "héllo→"))
    assert got.key == "clé" and got.value == "héllo→"


def test_truncated_envelope():
    with pytest.raises(WireError):
        decode_message(b"\x01\x02")


def test_truncated_body():
    data = encode_message(1, VstigPut(1, "k", 5, 1, 1))
    with pytest.raises(WireError):
        decode_message(data[:-3])


def test_trailing_garbage_rejected():
    data = encode_message(1, SwarmJoin(2)) + b"\x00"
    with pytest.raises(WireError):
        decode_message(data)


def test_unknown_type_rejected():
    data = bytearray(encode_message(1, Announce()))
    data[4] = 250
    with pytest.raises(WireError):
        decode_message(bytes(data))


def test_oversized_int_rejected():
    with pytest.raises(WireError):
        encode_message(1, Broadcast("k", 2 ** 70))


def test_swarm_id_range_checked():
    with pytest.raises(WireError):
        encode_message(1, SwarmJoin(70_000))
