import random

import pytest

from scriptbpe import (
    Alphabet,
    FilteredCharacterError,
    MalformedSequenceError,
    decode_bytes,
    decode_tokens,
    encode_bytes,
    encode_char,
    encode_span,
)


def test_alphabet_layout(table, script_alphabet):
    a = script_alphabet
    assert a.base_size == a.block_token_count + a.index_token_count
    assert a.block_token_count == len(table.blocks)
    assert a.index_token_count == table.threshold
    # disjoint contiguous ranges
    assert a.is_block_token(0)
    assert a.is_block_token(a.block_token_count - 1)
    assert not a.is_block_token(a.block_token_count)
    assert a.is_index_token(a.index_base)
    assert a.is_index_token(a.base_size - 1)
    assert not a.is_index_token(a.base_size)


def test_byte_alphabet(byte_alphabet):
    assert byte_alphabet.base_size == 256
    assert byte_alphabet.byte_token_count == 256


def test_encode_a_is_rank_zero(records, table, script_alphabet):
    # independent oracle: enumerate Latin LM codepoints ascending
    latin_lm = sorted(r.codepoint for r in records
                      if r.script == "Latin" and r.supercategory == "LM" and not r.filtered)
    assert latin_lm.index(0x41) == 0
    enc = encode_char("A", table, script_alphabet)
    block = table.blocks[enc.block_id]
    assert (block.script, block.supercategory, block.sub_index) == ("Latin", "LM", 0)
    assert enc.index_id == script_alphabet.index_base  # offset 0


def test_encode_b_same_block_next_index(table, script_alphabet):
    enc_a = encode_char("A", table, script_alphabet)
    enc_b = encode_char("B", table, script_alphabet)
    assert enc_b.block_id == enc_a.block_id
    assert enc_b.index_id == enc_a.index_id + 1


def test_encode_rank_formula_across_subblocks(records, table, script_alphabet):
    # a Han codepoint deep enough to land outside sub-block 0
    han = sorted(r.codepoint for r in records
                 if r.script == "Han" and r.supercategory == "LM" and not r.filtered)
    position = table.threshold * 3 + 17
    cp = han[position]
    enc = encode_char(chr(cp), table, script_alphabet)
    block = table.blocks[enc.block_id]
    assert (block.script, block.supercategory) == ("Han", "LM")
    assert block.sub_index == position // table.threshold
    assert enc.index_id - script_alphabet.index_base == position % table.threshold


def test_every_char_costs_two_tokens(table, script_alphabet):
    for text in ("A", "héllo", "語", "สวัสดี", "🙂"):
        ids = encode_span(text, table, script_alphabet)
        assert len(ids) == 2 * len(text)


def test_filtered_char_raises(table, script_alphabet):
    with pytest.raises(FilteredCharacterError):
        encode_char("", table, script_alphabet)


def test_decode_roundtrip(table, script_alphabet):
    for text in ("héllo", "", "a b\nc", "日本語です。", "بًب"):
        ids = encode_span(text, table, script_alphabet)
        assert decode_tokens(ids, table, script_alphabet) == text


def test_decode_rejects_lone_index(table, script_alphabet):
    with pytest.raises(MalformedSequenceError) as exc:
        decode_tokens([script_alphabet.index_base], table, script_alphabet)
    assert exc.value.offset == 0


def test_decode_rejects_dangling_block(table, script_alphabet):
    ids = encode_span("ab", table, script_alphabet)[:-1]
    with pytest.raises(MalformedSequenceError):
        decode_tokens(ids, table, script_alphabet)


def test_decode_rejects_index_beyond_subblock(table, script_alphabet):
    # find a block strictly smaller than the threshold
    small_pos = next(i for i, b in enumerate(table.blocks) if len(b.members) < table.threshold)
    bad_index = script_alphabet.index_base + len(table.blocks[small_pos].members)
    with pytest.raises(MalformedSequenceError) as exc:
        decode_tokens([small_pos, bad_index], table, script_alphabet)
    assert exc.value.offset == 1


def test_decode_rejects_merge_ids(table, script_alphabet):
    with pytest.raises(MalformedSequenceError):
        decode_tokens([script_alphabet.base_size], table, script_alphabet)


def test_decode_empty(table, script_alphabet):
    assert decode_tokens([], table, script_alphabet) == ""


def test_encode_bytes_examples():
    assert encode_bytes("A") == [0x41]
    assert encode_bytes("é") == [0xC3, 0xA9]
    assert len(encode_bytes("語")) == 3
    assert encode_bytes("") == []


def test_encode_bytes_parity():
    for text in ("hello", "héllo", "สวัสดี", "日本語", "🙂🙂"):
        assert len(encode_bytes(text)) == len(text.encode("utf-8"))


def test_decode_bytes_roundtrip_and_errors():
    assert decode_bytes(encode_bytes("héllo ครับ")) == "héllo ครับ"
    with pytest.raises(MalformedSequenceError) as exc:
        decode_bytes([0x61, 0xE0])
    assert exc.value.offset == 1


def test_fuzz_roundtrip_injective(table, script_alphabet):
    rng = random.Random(7)
    members = [cp for b in table.blocks for cp in b.members]
    seen = {}
    for _ in range(300):
        text = "".join(chr(rng.choice(members)) for _ in range(rng.randrange(0, 12)))
        ids = tuple(encode_span(text, table, script_alphabet))
        assert decode_tokens(ids, table, script_alphabet) == text
        # injectivity: same encoding implies same text
        assert seen.setdefault(ids, text) == text
