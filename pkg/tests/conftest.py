import pytest

from scriptbpe import (
    Alphabet,
    CharProps,
    PretokenizerSpec,
    build_block_table,
    load_bundled_ucd,
)


@pytest.fixture(scope="session")
def records():
    return load_bundled_ucd()


@pytest.fixture(scope="session")
def table(records):
    return build_block_table(records)


@pytest.fixture(scope="session")
def script_alphabet(table):
    return Alphabet.for_table(table)


@pytest.fixture(scope="session")
def byte_alphabet():
    return Alphabet.for_bytes()


@pytest.fixture(scope="session")
def props(table):
    return CharProps.from_block_table(table)


@pytest.fixture(scope="session")
def rule_spec():
    return PretokenizerSpec.rule_based()
