"""Segmented-line codec: rendering, parsing, and byte-exact round trips."""

import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subseg.core import SegmentedWord
from subseg.io import (
    SegmentedFormatError,
    SegmentedLineCodec,
    read_segmented,
    write_segmented,
)

units_st = st.lists(st.text(alphabet="abcdef", min_size=1, max_size=4), min_size=1, max_size=4)
row_st = st.lists(units_st.map(lambda u: SegmentedWord(tuple(u))), max_size=5)
rows_st = st.lists(row_st, max_size=6)


def test_parse_golden():
    codec = SegmentedLineCodec()
    rows = list(read_segmented(io.StringIO("ab@@ d\n")))
    assert rows == [(SegmentedWord(("ab", "d")),)]
    assert codec.render_row(rows[0]) == "ab@@ d"


def test_parse_dangling_marker_fails():
    with pytest.raises(SegmentedFormatError) as err:
        list(read_segmented(io.StringIO("ab@@\n")))
    assert "line 1" in str(err.value)
    with pytest.raises(SegmentedFormatError) as err:
        list(read_segmented(io.StringIO("ok\nab@@ cd@@\n")))
    assert "line 2" in str(err.value)


def test_parse_bare_marker_fails():
    with pytest.raises(SegmentedFormatError):
        list(read_segmented(io.StringIO("@@ a\n")))


def test_empty_lines_become_empty_rows():
    rows = list(read_segmented(io.StringIO("a b\n\nc\n")))
    assert [len(r) for r in rows] == [2, 0, 1]


def test_crlf_accepted_and_normalized():
    rows = list(read_segmented(io.BytesIO(b"ab@@ d\r\n")))
    buf = io.StringIO()
    write_segmented(rows, buf)
    assert buf.getvalue() == "ab@@ d\n"


@given(rows_st)
@settings(max_examples=100)
def test_write_read_round_trip(rows):
    rows = [tuple(row) for row in rows]
    buf = io.StringIO()
    write_segmented(rows, buf)
    assert list(read_segmented(io.StringIO(buf.getvalue()))) == rows


@given(rows_st)
@settings(max_examples=50)
def test_read_write_is_byte_identity_on_well_formed_files(rows):
    buf = io.StringIO()
    write_segmented([tuple(row) for row in rows], buf)
    text = buf.getvalue()
    again = io.StringIO()
    write_segmented(read_segmented(io.StringIO(text)), again)
    assert again.getvalue() == text


def test_custom_marker():
    codec = SegmentedLineCodec(continuation_marker="++")
    row = (SegmentedWord(("ab", "d")),)
    assert codec.render_row(row) == "ab++ d"
    assert codec.parse_row("ab++ d") == row


def test_codec_validation():
    with pytest.raises(ValueError):
        SegmentedLineCodec(continuation_marker="")
    with pytest.raises(ValueError):
        SegmentedLineCodec(continuation_marker="▁")
