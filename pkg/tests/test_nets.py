"""Net semantics: decomposition, net construction, token game, analyses,
and the net text format."""

from collections import Counter

import pytest

from multiccs.lts import Budget
from multiccs.nets import (
    FreshAllocator, PTNet, build_net, dec, fire, format_marking, format_pnet,
    is_reduced, is_safe, marking_graph, marking_leq, parse_pnet,
)
from multiccs.parser import ParseError, parse_program, parse_term
from multiccs.sync import SyncMode
from multiccs.terms import (
    GuardednessError, act_in, act_out, classify_finite_net, format_sequence,
)

from conftest import load_net, load_program


def places(marking, net):
    return format_marking(marking, net.place_names)


class TestDecomposition:
    def dec_of(self, text, defs=""):
        prog = parse_program(defs + "main = %s;" % text)
        return dec(prog.main, prog.env, FreshAllocator())

    def test_nil_vanishes(self):
        assert self.dec_of("0") == Counter()
        assert self.dec_of("a.0 | 0") == Counter({parse_term("a.0"): 1})

    def test_parallel_is_multiset_union(self):
        m = self.dec_of("a.0 | (b.0 | a.0)")
        assert m[parse_term("a.0")] == 2 and m[parse_term("b.0")] == 1

    def test_sequential_terms_are_single_places(self):
        for text in ["a.0", "<a>.b.0", "a.0 + b.0", "tau.0"]:
            m = self.dec_of(text)
            assert sum(m.values()) == 1

    def test_restriction_opens_to_a_fresh_restricted_name(self):
        m = self.dec_of("new(a)(a.0 | ~a.0)")
        names = {p.action.name for p in m}
        assert names == {"a#1"}
        assert all(p.action.is_restricted for p in m)

    def test_nested_restrictions_get_distinct_names(self):
        m = self.dec_of("new(a)(a.0 | (new(a) a.0))")
        assert {p.action.name for p in m} == {"a#1", "a#2"}

    def test_constant_unfolds_through_parallel(self):
        m = self.dec_of("K", defs="K = a.0 | b.K; ")
        assert m == Counter({parse_term("a.0"): 1, parse_term("b.K"): 1})

    def test_unguarded_constant_is_reported(self):
        with pytest.raises(GuardednessError):
            self.dec_of("K", defs="K = K | a.0; ")


class TestTokenGame:
    def test_fire_and_leq(self):
        m = Counter({0: 2, 1: 1})
        pre = Counter({0: 2})
        post = Counter({2: 1})
        assert marking_leq(pre, m)
        assert fire(m, pre, post) == Counter({1: 1, 2: 1})
        assert not marking_leq(Counter({0: 3}), m)

    def test_weighted_arcs(self):
        net = load_net("weighted")
        g = marking_graph(net)
        assert (len(g.states), len(g.transitions)) == (8, 8)
        assert g.states[0] == "3*s1 + 2*s2"

    def test_graph_deduplicates_edges(self):
        # two enabled ways to fire the same transition into the same
        # marking appear once
        net = PTNet("twin", ["s1"], Counter({0: 2}),
                    [(Counter({0: 1}), (act_in("a"),), Counter({0: 1}))])
        g = marking_graph(net)
        assert (len(g.states), len(g.transitions)) == (1, 1)

    def test_graph_truncation(self):
        net = load_net("weighted")
        g = marking_graph(net, Budget(max_states=3))
        assert not g.complete and len(g.states) == 3


class TestBuiltNets:
    def test_semi_counter(self):
        net = build_net(load_program("semicounter"))
        assert net.summary() == "2 places, 2 transitions, complete"
        shapes = {(places(pre, net), format_sequence(lab), places(post, net))
                  for pre, lab, post in net.transitions}
        assert shapes == {("s1", "up", "s1 + s2"), ("s2", "down", "(empty)")}
        assert is_safe(net) == "no"       # s2 is unbounded
        assert is_reduced(net) == "yes"

    def test_dining_philosophers(self):
        net = build_net(load_program("dining"))
        assert net.summary() == "10 places, 8 transitions, complete"
        taus = [(pre, post) for pre, lab, post in net.transitions
                if lab == (parse_term("tau.0").action,)]
        # grabbing and releasing both forks are three-party atomic steps
        assert len(taus) == 4
        assert all(sum(pre.values()) == 3 and sum(post.values()) == 3
                   for pre, post in taus)
        assert is_safe(net) == "yes"

    def test_readers_writers(self):
        net = build_net(load_program("readers_writers"))
        assert net.summary() == "8 places, 6 transitions, complete"
        assert places(net.initial, net) == "4*s1 + 2*s2 + 3*s3"
        pre_sizes = sorted(sum(pre.values()) for pre, lab, post in net.transitions
                           if lab == (parse_term("tau.0").action,))
        # a reader takes one lock token, a writer takes all three at once
        assert pre_sizes == [2, 2, 4, 4]
        g = marking_graph(net)
        assert (len(g.states), len(g.transitions)) == (12, 21)

    def test_multiway(self):
        net = build_net(load_program("multiway"))
        assert net.summary() == "6 places, 4 transitions, complete"
        labels = sorted(format_sequence(lab) for _, lab, _ in net.transitions)
        assert labels == ["cp", "cq", "cr", "tau"]
        tau_pre = [pre for pre, lab, _ in net.transitions
                   if format_sequence(lab) == "tau"]
        assert len(tau_pre) == 1 and sum(tau_pre[0].values()) == 3

    def test_counter_is_infinite_and_monotone_under_budget(self):
        prog = load_program("counter")
        small = build_net(prog, budget=Budget(max_states=30))
        large = build_net(prog, budget=Budget(max_states=60))
        assert not small.complete and not large.complete
        assert len(small.place_names) < len(large.place_names)
        assert len(large.place_names) == 96

    def test_duplicator_contrast(self):
        prog = load_program("duplicator")
        fn = build_net(prog, mode=SyncMode.FINITE_NET)
        assert fn.complete and len(fn.transitions) == 1
        pre, lab, post = fn.transitions[0]
        assert format_sequence(lab) == "a ~a"
        assert (places(pre, fn), places(post, fn)) == ("s1", "2*s1")
        gen = build_net(prog, mode=SyncMode.GENERAL,
                        budget=Budget(max_transitions=5))
        assert not gen.complete
        shapes = {(places(pre, gen), places(post, gen))
                  for pre, _, post in gen.transitions}
        assert ("s1", "2*s1") in shapes and ("2*s1", "4*s1") in shapes

    def test_mode_defaults_to_the_fragment_check(self):
        sc = load_program("semicounter")
        assert classify_finite_net(sc)[0]
        counter = load_program("counter")
        assert not classify_finite_net(counter)[0]
        # same outcome as forcing the mode explicitly
        auto = build_net(sc)
        forced = build_net(sc, mode=SyncMode.FINITE_NET)
        assert auto.summary() == forced.summary()

    def test_built_nets_are_reduced(self):
        for name in ["semicounter", "dining", "readers_writers", "multiway"]:
            net = build_net(load_program(name))
            assert is_reduced(net) == "yes", name

    def test_restricted_actions_never_surface(self):
        net = build_net(load_program("dining"))
        for _, lab, _ in net.transitions:
            assert not any(a.is_restricted for a in lab)

    def test_deterministic_construction(self):
        a = build_net(load_program("readers_writers"))
        b = build_net(load_program("readers_writers"))
        assert format_pnet(a) == format_pnet(b)


class TestAnalyses:
    def test_is_safe_spots_initial_overload(self):
        assert is_safe(load_net("weighted")) == "no"

    def test_is_safe_yes_and_unknown(self):
        assert is_safe(load_net("phils")) == "yes"
        sc = build_net(load_program("semicounter"))
        assert is_safe(sc, Budget(max_states=2)) in ("no", "unknown")

    def test_is_reduced_corpus(self):
        for name in ["phils", "weighted", "loop_a", "cycle_a"]:
            assert is_reduced(load_net(name)) == "yes", name

    def test_is_reduced_rejects_dead_place(self):
        net = PTNet("dead", ["s1", "s2"], Counter({0: 1}),
                    [(Counter({0: 1}), (act_in("a"),), Counter({0: 1}))])
        assert is_reduced(net) == "no"

    def test_is_reduced_rejects_dead_transition(self):
        net = PTNet("stuck", ["s1"], Counter({0: 1}),
                    [(Counter({0: 2}), (act_in("a"),), Counter())])
        assert is_reduced(net) == "no"

    def test_is_reduced_rejects_empty_preset(self):
        net = PTNet("spont", ["s1"], Counter({0: 1}),
                    [(Counter(), (act_in("a"),), Counter({0: 1}))])
        assert is_reduced(net) == "no"

    def test_is_reduced_unknown_when_truncated(self):
        prog = load_program("counter")
        net = build_net(prog, budget=Budget(max_states=30))
        assert is_reduced(net, Budget(max_states=5)) in ("unknown", "yes")


class TestNetFormat:
    def test_roundtrip_corpus(self):
        for name in ["phils", "weighted", "loop_a", "cycle_a"]:
            net = load_net(name)
            again = parse_pnet(format_pnet(net))
            assert again.place_names == net.place_names
            assert again.initial == net.initial
            assert again.transitions == net.transitions

    def test_roundtrip_built(self):
        net = build_net(load_program("dining"))
        again = parse_pnet(format_pnet(net))
        assert again.initial == net.initial
        assert again.transitions == net.transitions

    @pytest.mark.parametrize("bad", [
        "place s1 init 1",                                   # missing header
        "net n place s1 init 1 trans t label a in out s1:1", # empty preset
        "net n place s1 init 1 trans t label a in s1:0 out", # zero weight
        "net n place s1 init 1 place s1 init 0",             # duplicate place
        "net n place s1 init 1 trans t label a in s9:1 out", # unknown place
        "net n place s1 init 1 trans t label in s1:1 out",   # missing label
    ])
    def test_rejects(self, bad):
        with pytest.raises(ParseError):
            parse_pnet(bad)

    def test_labels_may_be_sequences(self):
        net = parse_pnet("net n place s1 init 1 "
                         "trans t label a.~b.tau in s1:1 out s1:2")
        (_, lab, _), = net.transitions
        assert lab == (act_in("a"), act_out("b"), parse_term("tau.0").action)
