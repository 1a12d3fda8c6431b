"""Transition-system semantics: base moves, composed moves, restriction,
atomic sequences, budgets."""

import pytest

from multiccs.lts import Budget, StepEngine, build_lts, step
from multiccs.parser import parse_program, parse_term
from multiccs.sync import SyncMode
from multiccs.terms import GuardednessError, TAU_ACT, act_in, act_out

from conftest import load_program

TAU = (TAU_ACT,)


def lts_of(text, **kw):
    return build_lts(parse_program(text), **kw)


def shape(lts):
    return len(lts.states), len(lts.transitions)


def init_labels(lts):
    return sorted(
        (tuple(str(a) for a in lab) for s, lab, _ in lts.transitions if s == lts.initial))


class TestBaseMoves:
    def test_nil_is_stuck(self):
        assert shape(lts_of("main = 0;")) == (1, 0)

    def test_prefix(self):
        l = lts_of("main = a.0;")
        assert shape(l) == (2, 1)
        assert l.transitions == [(0, (act_in("a"),), 1)]

    def test_sum_offers_both(self):
        l = lts_of("main = a.0 + b.0;")
        assert shape(l) == (2, 2)
        assert init_labels(l) == [("a",), ("b",)]

    def test_sum_deduplicates_identical_summands(self):
        l = lts_of("main = a.0 + a.0;")
        assert shape(l) == (2, 1)

    def test_constant_unfolds(self):
        l = lts_of("K = a.K; main = K;")
        assert shape(l) == (1, 1)   # self loop

    def test_unguarded_recursion_is_reported(self):
        with pytest.raises(GuardednessError):
            lts_of("P = Q + a.0; Q = P + b.0; main = P;")

    def test_strong_prefix_needs_a_continuation(self):
        # an atomic head whose body cannot move is a dead end
        assert shape(lts_of("main = <a>.0;")) == (1, 0)

    def test_strong_prefix_builds_sequence(self):
        l = lts_of("main = <a>.b.0;")
        assert shape(l) == (2, 1)
        assert l.transitions[0][1] == (act_in("a"), act_in("b"))


class TestComposition:
    def test_interleaving_diamond(self):
        assert shape(lts_of("main = a.0 | b.0;")) == (4, 4)

    def test_handshake_adds_tau(self):
        l = lts_of("main = a.0 | ~a.0;")
        assert shape(l) == (4, 5)
        assert ("tau",) in init_labels(l)

    def test_restriction_forces_the_handshake(self):
        l = lts_of("main = new(a)(a.0 | ~a.0);")
        assert shape(l) == (2, 1)
        assert init_labels(l) == [("tau",)]

    def test_restriction_blocks_a_lone_offer(self):
        assert shape(lts_of("main = new(a) a.0;")) == (1, 0)

    def test_restriction_does_not_reach_outside_its_scope(self):
        l = lts_of("main = (new(a) a.0) | ~a.0;")
        assert shape(l) == (2, 1)
        assert init_labels(l) == [("~a",)]

    def test_bound_and_free_copies_of_a_name_stay_apart(self):
        l = lts_of("main = (new(a) a.0) | a.0;")
        assert shape(l) == (2, 1)
        assert init_labels(l) == [("a",)]

    def test_atomic_sequence_closes_against_an_offer(self):
        # the pair a/~a cancels inside the sequence, leaving b
        l = lts_of("main = <a>.b.0 | ~a.0;")
        assert shape(l) == (4, 5)
        assert ("b",) in init_labels(l)

    def test_three_components_all_orders_covered(self):
        l = lts_of("main = a.0 | (b.0 | c.0);")
        r = lts_of("main = (a.0 | b.0) | c.0;")
        assert l.states == r.states and l.transitions == r.transitions
        assert shape(l) == (8, 12)

    def test_finite_net_mode_drops_transactional_merges(self):
        gen = lts_of("main = <a>.b.0 | <c>.~a.0;")
        fn = lts_of("main = <a>.b.0 | <c>.~a.0;", mode=SyncMode.FINITE_NET)
        assert ("c", "b") in init_labels(gen)
        assert ("c", "b") not in init_labels(fn)
        assert len(init_labels(fn)) == 2


class TestNamedSystems:
    def test_multiway_association_is_one_tau(self):
        l = build_lts(load_program("multiway"))
        assert shape(l) == (9, 13)
        assert init_labels(l) == [("tau",)]

    def test_dining_philosophers(self):
        l = build_lts(load_program("dining"))
        assert shape(l) == (5, 11)
        labels = {tuple(str(a) for a in lab) for _, lab, _ in l.transitions}
        # fork handshakes are restricted away: only thinking, eating and
        # the atomic grab/release remain visible
        assert labels == {("think",), ("eat",), ("tau",)}

    def test_dining_philosophers_cannot_deadlock(self):
        l = build_lts(load_program("dining"))
        out_degree = {i: 0 for i in range(len(l.states))}
        for s, _, _ in l.transitions:
            out_degree[s] += 1
        assert all(n > 0 for n in out_degree.values())

    def test_semi_counter_is_infinite_state(self):
        l = build_lts(load_program("semicounter"), budget=Budget(max_states=8))
        assert not l.complete
        assert len(l.states) == 8

    def test_semi_counter_wide_states(self):
        # states grow one parallel component per up-step; a few hundred of
        # them must not break hashing, printing, or normalization
        l = build_lts(load_program("semicounter"), budget=Budget(max_states=300))
        assert not l.complete
        assert len(l.states) == 300
        assert all(0 <= s < 300 and 0 <= d < 300 for s, _, d in l.transitions)


class TestStepAndDeterminism:
    def test_step_on_a_raw_term(self):
        env = parse_program("main = 0;").env
        moves = step(parse_term("a.0 | ~a.0"), env)
        assert len(moves) == 3
        labels = [lab for lab, _ in moves]
        assert TAU in labels

    def test_step_results_are_sorted_and_stable(self):
        env = parse_program("main = 0;").env
        t = parse_term("b.0 + a.0 | ~a.c.0")
        assert step(t, env) == step(t, env)

    def test_building_twice_gives_identical_systems(self):
        a = build_lts(load_program("dining"))
        b = build_lts(load_program("dining"))
        assert a.states == b.states and a.transitions == b.transitions

    def test_engine_reuse_matches_fresh_engines(self):
        env = parse_program("main = 0;").env
        engine = StepEngine(env)
        t1, t2 = parse_term("a.0 | ~a.0"), parse_term("a.b.0 | c.0")
        fresh = [step(t, env) for t in (t1, t2)]
        shared = [step(t, env, engine=engine) for t in (t1, t2)]
        assert fresh == shared

    def test_strict_mode_keeps_inert_components(self):
        lax = lts_of("main = a.0 | 0;")
        strict = lts_of("main = a.0 | 0;", strict=True)
        assert lax.states != strict.states
        assert shape(lax) == shape(strict) == (2, 1)


class TestLtsHelpers:
    def test_successors_and_labels(self):
        l = lts_of("main = a.b.0;")
        assert l.successors(0) == [((act_in("a"),), 1)]
        assert l.labels() == {(act_in("a"),), (act_in("b"),)}

    def test_summary_mentions_truncation(self):
        l = lts_of("main = a.0;")
        assert "complete" in l.summary()
        t = build_lts(load_program("semicounter"), budget=Budget(max_states=3))
        assert "truncated" in t.summary()
