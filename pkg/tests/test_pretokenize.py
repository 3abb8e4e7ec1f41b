import random

import pytest

from scriptbpe import Alphabet, PretokenizerSpec, Pretokenizer, pretokenize
from scriptbpe.errors import ScriptBpeError
from scriptbpe.pretokenize import (
    CL100K_PATTERN,
    DEFAULT_SPACE_MERGE_SCRIPTS,
    O200K_PATTERN,
    Group,
    group_initial,
    merge_han_hiragana,
    merge_inherited,
    merge_spaces,
    split_regex,
    split_rule_based,
)


@pytest.fixture(scope="module")
def rule_split(props, rule_spec):
    def split(text):
        return split_rule_based(props.filter_text(text), props, rule_spec)
    return split


def keys(groups):
    return [(g.text, g.script, g.supercategory) for g in groups]


# ---------------------------------------------------------------------------
# Initial grouping

def test_group_initial_examples(props):
    assert keys(group_initial("ab12", props)) == [
        ("ab", "Latin", "LM"), ("12", "Common", "N")]
    assert group_initial("", props) == []
    assert keys(group_initial("  ", props)) == [("  ", "Common", "Z")]


def test_group_initial_concatenation_is_identity(props):
    text = "ab 12語 ,สวัสดี\n"
    assert "".join(g.text for g in group_initial(text, props)) == text


def test_group_initial_rejects_filtered(props):
    with pytest.raises(ScriptBpeError):
        group_initial("ab", props)


# ---------------------------------------------------------------------------
# The golden suite: full rule pipeline, hand-derived expectations

RULE_CASES = [
    # initial grouping and basic splits
    ("ab12", ["ab", "12"]),
    ("", []),
    ("  ", ["  "]),
    ("abc", ["abc"]),
    ("a,b", ["a", ",", "b"]),
    ("héllo", ["héllo"]),
    ("abcдеф", ["abc", "деф"]),
    ("abc123def", ["abc", "123", "def"]),
    ("a1b2", ["a", "1", "b", "2"]),
    ("100 dollars", ["100", " dollars"]),
    # single-space merging
    ("a b", ["a", " b"]),
    (" fine", [" fine"]),
    (" 食", [" ", "食"]),                    # Han not whitespace-separated
    ("  ok", ["  ", "ok"]),                  # two spaces are not a single space
    (" !", [" !"]),                          # Common PS merges
    (" %", [" %"]),
    (" 1", [" ", "1"]),                      # numbers never take the space
    ("a ", ["a", " "]),                      # no following group
    (" ", [" "]),
    ("ا ب", ["ا", " ب"]),                    # Arabic is whitespace-separated
    ("안녕 하세요", ["안녕", " 하세요"]),       # Hangul too
    ("नमस्ते जी", ["नमस्ते", " जी"]),           # Devanagari, matras stay attached
    (" ๆ", [" ", "ๆ"]),                      # Thai is not in the list
    (" a", [" ", "a"]),            # NBSP is not U+0020
    ("a\nb", ["a", "\n", "b"]),
    ("a \n", ["a", " \n"]),                  # space+newline form one Z group
    ("\t\n", ["\t\n"]),
    # Inherited merging
    ("ñ", ["ñ"]),
    ("̃n", ["̃", "n"]),            # leading Inherited stays standalone
    ("̃́", ["̃́"]),
    ("بًبًب", ["بًبًب"]),   # alternating run collapses
    ("à́b", ["à́b"]),
    ("señor", ["señor"]),
    ("1̃", ["1̃"]),                # marks attach to digit groups too
    ("a‍b", ["a‍b"]),              # ZWJ carries Inherited script
    ("かーん", ["かーん"]),            # prolonged mark joins hiragana
    ("カー", ["カー"]),               # and katakana
    ("ｶｰ", ["ｶｰ"]),                # halfwidth variant
    (" ー", [" ー"]),                # Inherited attaches to any predecessor
    ("بـب", ["بـب"]),                        # tatweel reassigned into Arabic
    # Han/Hiragana merging
    ("食べる", ["食べる"]),
    ("カタ食", ["カタ", "食"]),               # Katakana does not join
    ("食", ["食"]),
    ("べ食べ", ["べ食べ"]),
    ("日本語です。", ["日本語です", "。"]),
    ("食̃べる", ["食̃べる"]),        # mark inside a mixed kanji-kana word
    # pass-order interaction: space never merges into Hiragana even though
    # Han/Hiragana merging runs later
    (" かな", [" ", "かな"]),
    # contractions split at the apostrophe
    ("I'm fine", ["I", "'", "m", " fine"]),
    ("don't stop", ["don", "'", "t", " stop"]),
    # filtered codepoints vanish before grouping
    ("ab", ["ab"]),
]


@pytest.mark.parametrize("text,expected", RULE_CASES, ids=[repr(c[0]) for c in RULE_CASES])
def test_rule_based_golden(rule_split, text, expected):
    assert rule_split(text) == expected


def test_golden_suite_is_large_enough():
    assert len(RULE_CASES) >= 40


# ---------------------------------------------------------------------------
# Individual passes

def test_merge_spaces_single_space_only(props, rule_spec):
    groups = group_initial("  ok", props)
    assert keys(merge_spaces(groups, rule_spec)) == [
        ("  ", "Common", "Z"), ("ok", "Latin", "LM")]


def test_merge_spaces_keeps_follower_label(props, rule_spec):
    groups = merge_spaces(group_initial(" fine", props), rule_spec)
    assert keys(groups) == [(" fine", "Latin", "LM")]


def test_merge_spaces_respects_configured_scripts(props):
    spec = PretokenizerSpec(mode="rule", space_merge_scripts=("Han",))
    groups = merge_spaces(group_initial(" 食", props), spec)
    assert keys(groups) == [(" 食", "Han", "LM")]
    groups = merge_spaces(group_initial(" fine", props), spec)
    assert [g.text for g in groups] == [" ", "fine"]


def test_default_space_merge_scripts_is_the_twenty_script_list():
    assert len(DEFAULT_SPACE_MERGE_SCRIPTS) == 20
    for name in ("Latin", "Arabic", "Devanagari", "Hangul", "Ethiopic",
                 "Cyrillic", "Greek", "Hebrew", "Bengali", "Syriac", "Oriya",
                 "Tamil", "Telugu", "Gurmukhi", "Gujarati", "Sinhala",
                 "Malayalam", "Armenian", "Kannada", "Georgian"):
        assert name in DEFAULT_SPACE_MERGE_SCRIPTS


def test_merge_inherited_alternation(props):
    groups = group_initial("بًبًب", props)
    assert len(groups) == 5  # Arabic, Inherited, Arabic, Inherited, Arabic
    merged = merge_inherited(groups)
    assert keys(merged) == [("بًبًب", "Arabic", "LM")]


def test_merge_inherited_leading_group_unchanged(props):
    groups = merge_inherited(group_initial("̃n", props))
    assert [g.text for g in groups] == ["̃", "n"]


def test_merge_han_hiragana(props):
    groups = merge_han_hiragana(group_initial("食べる", props))
    assert [g.text for g in groups] == ["食べる"]
    groups = merge_han_hiragana(group_initial("カタ食", props))
    assert [g.text for g in groups] == ["カタ", "食"]
    groups = merge_han_hiragana(group_initial("食", props))
    assert [g.text for g in groups] == ["食"]


def test_passes_are_idempotent(props, rule_spec):
    texts = [text for text, _ in RULE_CASES] + ["mixed 食べる بً x̃ y"]
    for text in texts:
        clean = props.filter_text(text)
        groups = group_initial(clean, props)
        for merge_pass in (
            lambda g: merge_spaces(g, rule_spec),
            merge_inherited,
            merge_han_hiragana,
        ):
            once = merge_pass(groups)
            twice = merge_pass(once)
            assert keys(twice) == keys(once)
            groups = once


# ---------------------------------------------------------------------------
# Regex mode

CL100K_CASES = [
    ("I'm fine", ["I", "'m", " fine"]),
    ("hello world", ["hello", " world"]),
    ("a 1234", ["a", " ", "123", "4"]),
    ("สวัสดี", ["สว", "ัสด", "ี"]),  # marks break the letter runs
]


@pytest.mark.parametrize("text,expected", CL100K_CASES, ids=[repr(c[0]) for c in CL100K_CASES])
def test_cl100k_golden(text, expected):
    spec = PretokenizerSpec(mode="regex", pattern=CL100K_PATTERN)
    assert split_regex(text, spec.compiled_pattern()) == expected


O200K_CASES = [
    ("I'm fine", ["I'm", " fine"]),
    ("สวัสดี", ["สวัสดี"]),  # \p{M} keeps marked words whole
]


@pytest.mark.parametrize("text,expected", O200K_CASES, ids=[repr(c[0]) for c in O200K_CASES])
def test_o200k_golden(text, expected):
    spec = PretokenizerSpec(mode="regex", pattern=O200K_PATTERN)
    assert split_regex(text, spec.compiled_pattern()) == expected


def test_spec_validation():
    with pytest.raises(ScriptBpeError):
        PretokenizerSpec(mode="rule", pattern="x")
    with pytest.raises(ScriptBpeError):
        PretokenizerSpec(mode="regex")
    with pytest.raises(ScriptBpeError):
        PretokenizerSpec.from_name("nope")
    with pytest.raises(ScriptBpeError):
        PretokenizerSpec(mode="regex", pattern="(unbalanced").compiled_pattern()


def test_named_patterns():
    assert PretokenizerSpec.from_name("cl100k").pattern == CL100K_PATTERN
    assert PretokenizerSpec.from_name("o200k").pattern == O200K_PATTERN
    assert PretokenizerSpec.from_name("rule").mode == "rule"


# ---------------------------------------------------------------------------
# Encoding integration and invariants

def test_pretokenize_script_encoding(table, script_alphabet, rule_spec):
    pts = pretokenize("I'm fine", rule_spec, table, script_alphabet)
    assert [len(p) for p in pts] == [2, 2, 2, 10]  # two ids per character


def test_pretokenize_byte_encoding(table, byte_alphabet, rule_spec):
    pre = Pretokenizer(rule_spec, table, byte_alphabet)
    pts = pre.pretokenize("I'm fine")
    assert [bytes(p).decode() for p in pts] == ["I", "'", "m", " fine"]


def test_filtered_only_text_yields_nothing(table, script_alphabet, rule_spec):
    assert pretokenize("", rule_spec, table, script_alphabet) == []


FUZZ_POOL = (
    "abcdefgh ABC xyz ,.!?  0123456789 éàñü дом сад 語 日本語です カタカナ "
    "ひらがな สวัสดีครับ ไทย नमस्ते हिंदी بًسم الله x̀́ ー "
    "\t\n\U000f0000 안녕 하세요 שלום"
)


def _fuzz_texts(n, seed=11):
    rng = random.Random(seed)
    for _ in range(n):
        yield "".join(rng.choice(FUZZ_POOL) for _ in range(rng.randrange(0, 60)))


def test_lossless_partition_rule_mode(props, rule_spec):
    for text in _fuzz_texts(200):
        clean = props.filter_text(text)
        assert "".join(split_rule_based(clean, props, rule_spec)) == clean


def test_lossless_partition_regex_mode(props):
    for name in ("cl100k", "o200k"):
        spec = PretokenizerSpec.from_name(name)
        compiled = spec.compiled_pattern()
        for text in _fuzz_texts(120, seed=13):
            clean = props.filter_text(text)
            assert "".join(split_regex(clean, compiled)) == clean


def test_rule_pretokens_are_homogeneous_modulo_rules(props, rule_spec):
    """Ignoring Inherited characters and spaces, a rule-based pretoken is one
    (script, supercategory) run, or a Han/Hiragana LM mixture."""
    for text in _fuzz_texts(200, seed=17):
        clean = props.filter_text(text)
        for piece in split_rule_based(clean, props, rule_spec):
            labels = set()
            for c in piece:
                script, supercat = props.lookup(ord(c))
                if script == "Inherited" or c == " ":
                    continue
                labels.add((script, supercat))
            if len(labels) > 1:
                assert all(sc == "LM" and s in ("Han", "Hiragana") for s, sc in labels), piece
