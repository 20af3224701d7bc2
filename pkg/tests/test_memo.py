"""Memoization: windowed table behavior and memoized links."""

import pytest

from pegfold.grammar import parse_grammar
from pegfold.interp import ParseSession
from pegfold.memo import FAILED, MemoEntry, MemoTable
from pegfold.tree import serialize


def entry(consumed):
    return MemoEntry(True, consumed, None)


# -- table unit behavior ------------------------------------------------------


def test_empty_table_misses():
    t = MemoTable(points=2, window=16)
    assert t.lookup(0, 0) is None
    assert t.lookup(1, 7) is None
    assert (t.lookups, t.hits) == (2, 0)


def test_store_then_load():
    t = MemoTable(points=1, window=16)
    e = entry(3)
    t.memoize(0, 5, e)
    assert t.lookup(0, 5) is e
    assert (t.lookups, t.hits) == (1, 1)


def test_same_key_overwrites():
    t = MemoTable(points=1, window=16)
    t.memoize(0, 5, entry(1))
    newer = entry(2)
    t.memoize(0, 5, newer)
    assert t.lookup(0, 5) is newer


def test_failures_are_stored_and_replayed():
    t = MemoTable(points=1, window=16)
    t.memoize(0, 4, FAILED)
    got = t.lookup(0, 4)
    assert got is FAILED and not got.ok


def test_points_are_independent():
    t = MemoTable(points=3, window=8)
    t.memoize(2, 4, entry(9))
    assert t.lookup(0, 4) is None
    assert t.lookup(2, 4) is not None


def test_ring_collision_evicts_row():
    t = MemoTable(points=1, window=16)
    t.memoize(0, 5, entry(1))
    assert t.lookup(0, 21) is None  # 21 % 16 == 5: claims the row
    assert t.lookup(0, 5) is None   # old resident gone


def test_entries_behind_the_window_expire():
    t = MemoTable(points=1, window=16)
    t.memoize(0, 5, entry(1))
    assert t.lookup(0, 5) is not None
    t.lookup(0, 100)  # slides the frontier far ahead
    assert t.lookup(0, 5) is None


def test_entries_within_the_window_survive():
    t = MemoTable(points=1, window=64)
    t.memoize(0, 5, entry(1))
    t.lookup(0, 60)
    assert t.lookup(0, 5) is not None


def test_window_one_still_serves_the_current_position():
    t = MemoTable(points=1, window=1)
    t.memoize(0, 9, entry(2))
    assert t.lookup(0, 9) is not None
    t.memoize(0, 10, entry(1))
    assert t.lookup(0, 9) is None


def test_window_must_be_positive():
    with pytest.raises(ValueError):
        MemoTable(points=1, window=0)


# -- memoized evaluation ------------------------------------------------------


def run(text, data, **kw):
    session = ParseSession(parse_grammar(text), data, **kw)
    return session.parse(), session


def test_distinct_positions_both_miss():
    g = "Add = { #Add @Num '+' @Num }\nNum = { #Int [0-9] }"
    result, _ = run(g, b"1+2")
    assert result.stats.memo_lookups == 2
    assert result.stats.memo_hits == 0


def test_second_alternative_hits_and_reuses_node():
    g = "S = { #S @A 'x' } / { #S @A 'y' }\nA = { #A 'a1' }"
    result, session = run(g, b"a1y")
    assert result.stats.memo_lookups == 2
    assert result.stats.memo_hits == 1
    stored = [
        row[1][0] for row in session.table.rows if row is not None and row[1][0] is not None
    ]
    assert len(stored) == 1
    assert stored[0].node is result.root.children[0]  # the very same object


def test_hit_failure_fails_immediately():
    g = "S = A 'x' / A 'y' / 'zz'\nA = 'a' 'b'"
    result, _ = run(g, b"zz")
    # A fails at 0 once; the second alternative replays the failure
    assert result.stats.memo_lookups >= 2
    assert result.stats.memo_hits >= 1
    assert result.consumed == 2


def test_plain_nonterminal_hit_is_a_pure_advance():
    g = "S = T 'x' / T 'y'\nT = 'ab' 'c'"
    result, _ = run(g, b"abcy")
    assert result.stats.memo_hits == 1
    assert serialize(result.root) == "#token['abcy']"


def test_memoized_link_of_sometimes_creating_body():
    # V creates a node for digits but not for 'z': both outcomes are
    # stored and replayed faithfully.
    g = "S = { #S @V 'x' } / { #S @V 'y' }\nV = { #N [0-9] } / 'z'"
    for data, expect in ((b"1y", "#S[#N['1']]"), (b"zy", "#S['zy']")):
        result, _ = run(g, data)
        assert result.stats.memo_hits == 1
        assert serialize(result.root) == expect


def test_memo_off_disables_table_but_not_results():
    g = "S = { #S @A 'x' } / { #S @A 'y' }\nA = { #A 'a' }"
    on, _ = run(g, b"ay", memo=True)
    off, _ = run(g, b"ay", memo=False)
    assert serialize(on.root) == serialize(off.root)
    assert off.stats.memo_lookups == 0 and off.stats.memo_hits == 0
    assert on.stats.memo_lookups > 0


def test_window_only_affects_hit_rate():
    g = "S = T 'x' / T 'y'\nT = 'ab' 'c'"
    wide, _ = run(g, b"abcy", window=256)
    tiny, _ = run(g, b"abcy", window=1)
    assert wide.consumed == tiny.consumed == 4
    assert tiny.stats.memo_hits <= wide.stats.memo_hits
