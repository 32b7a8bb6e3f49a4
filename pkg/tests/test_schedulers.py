"""Arbiter unit tests: pointer mechanics, matching validity, maximality."""

import random

from spac.schedulers import (EDRRMScheduler, ISLIPScheduler, RRScheduler,
                             _pick, greedy_maximal, is_matching, is_maximal,
                             make_scheduler, rows_from_matrix)


def test_pick_circular():
    assert _pick(0b0000, 0, 4) == -1
    assert _pick(0b0001, 0, 4) == 0
    assert _pick(0b0001, 1, 4) == 0      # wraps
    assert _pick(0b1010, 2, 4) == 3
    assert _pick(0b1010, 0, 4) == 1


def test_rows_from_matrix():
    rows = rows_from_matrix([[1, 0, 1], [0, 0, 0], [0, 1, 0]])
    assert rows == [0b101, 0, 0b010]


def test_rr_single_request():
    s = RRScheduler(4)
    assert s.arbitrate([0b0010, 0, 0, 0]) == {0: 1}
    # pointers advanced past the served pair
    assert s.grant_ptr[1] == 1 and s.accept_ptr[0] == 2


def test_rr_contention_rotates():
    s = RRScheduler(2)
    first = s.arbitrate([0b01, 0b01])   # both want output 0
    second = s.arbitrate([0b01, 0b01])
    assert list(first.values()) == [0] and list(second.values()) == [0]
    assert set(first) != set(second)    # the loser wins next time


def test_islip_iterations_fill_matching():
    # input 0 wants both outputs, input 1 wants output 0 only; one iteration
    # can leave an edge unmatched, n iterations may not
    rows = [0b11, 0b01, 0b00]
    m = ISLIPScheduler(3, 3).arbitrate(rows)
    assert is_matching(m) and is_maximal(rows, m, 3)


def test_islip_desynchronization_reaches_full_rate():
    # all inputs always request all outputs: after a few slots the pointers
    # desynchronize and every slot yields a full matching
    n = 4
    s = ISLIPScheduler(n, 1)
    rows = [(1 << n) - 1] * n
    sizes = [len(s.arbitrate(rows)) for _ in range(12)]
    assert all(size == n for size in sizes[4:])


def test_edrrm_holds_until_released():
    s = EDRRMScheduler(3)
    m1 = s.arbitrate([0b001, 0, 0])
    assert m1 == {0: 0}
    # held pair persists even if the request mask goes quiet
    assert s.arbitrate([0, 0, 0]) == {0: 0}
    s.release(0)
    assert s.arbitrate([0, 0, 0]) == {}


def test_edrrm_held_output_not_regranted():
    s = EDRRMScheduler(2)
    assert s.arbitrate([0b01, 0b01]) == {0: 0}
    m = s.arbitrate([0b01, 0b01])     # input 1 requests the held output
    assert m == {0: 0}                # no double grant of output 0


def test_make_scheduler_dispatch():
    assert isinstance(make_scheduler("rr", 4), RRScheduler)
    assert isinstance(make_scheduler("islip", 4, 2), ISLIPScheduler)
    assert isinstance(make_scheduler("edrrm", 4), EDRRMScheduler)


def test_random_matrices_validity():
    rng = random.Random(11)
    for _ in range(500):
        n = rng.randint(2, 12)
        rows = [rng.getrandbits(n) for _ in range(n)]
        for arb in (RRScheduler(n), ISLIPScheduler(n, n), EDRRMScheduler(n)):
            m = arb.arbitrate(rows)
            assert is_matching(m)
            assert all((rows[i] >> j) & 1 for i, j in m.items())
        mi = ISLIPScheduler(n, n).arbitrate(rows)
        assert is_maximal(rows, mi, n)
        g = greedy_maximal(rows, n)
        assert is_maximal(rows, g, n)


def test_is_maximal_detects_augmenting_edge():
    rows = [0b01, 0b10]
    assert not is_maximal(rows, {}, 2)
    assert is_maximal(rows, {0: 0, 1: 1}, 2)
