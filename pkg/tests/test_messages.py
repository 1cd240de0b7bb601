import pytest

from dynlist.messages import EncodingParams, Message, message_bits

ENC = EncodingParams()


def test_flag_message_is_two_bits():
    assert message_bits(Message(plain_new=True), ENC) == 2
    assert message_bits(Message(plain_del=True), ENC) == 2
    assert message_bits(Message(plain_new=True, plain_del=True), ENC) == 2


def test_single_id_message():
    m = Message(new_ids=frozenset((7,)))
    assert message_bits(m, ENC) == 2 + 8 + 32 + 8 + 0


def test_mixed_id_message():
    m = Message(new_ids=frozenset((3, 5)), del_ids=frozenset((9,)))
    assert message_bits(m, ENC) == 2 + 8 + 64 + 8 + 32


def test_empty_message_costs_nothing():
    assert message_bits(Message(), ENC) == 0


def test_flags_and_ids_are_exclusive():
    with pytest.raises(ValueError):
        message_bits(Message(new_ids=frozenset((1,)), plain_new=True), ENC)


def test_count_field_capacity():
    wide = Message(new_ids=frozenset(range(300)))
    with pytest.raises(ValueError):
        message_bits(wide, EncodingParams(id_bits=32, count_bits=8))
    assert message_bits(wide, EncodingParams(id_bits=32, count_bits=16)) == 2 + 32 + 300 * 32


def test_merge_concatenates():
    a = Message(new_ids=frozenset((1,)), del_ids=frozenset((2,)))
    b = Message(new_ids=frozenset((3,)))
    merged = a.merge(b)
    assert merged.new_ids == frozenset((1, 3))
    assert merged.del_ids == frozenset((2,))
    f = Message(plain_new=True).merge(Message(plain_del=True))
    assert f.plain_new and f.plain_del


def test_custom_widths():
    m = Message(new_ids=frozenset((7,)))
    assert message_bits(m, EncodingParams(id_bits=16, count_bits=4)) == 2 + 4 + 16 + 4
