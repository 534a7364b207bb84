import pytest

from mtgmate import cards
from mtgmate import compiler as C
from mtgmate import engine as E
from mtgmate import harness as H
from mtgmate.cards import scripts

def test_deck_has_sixty_cards():
    deck = cards.instantiate_deck()
    assert deck.total == 60


@pytest.mark.parametrize("name,count", [("Rotlung Reanimator", 1), ("Cruel Entertainment", 1), ("Lotus Petal", 3)])
def test_deck_contains(name, count):
    deck = cards.instantiate_deck()
    assert (name, count) in deck


def test_deck_entries_all_resolve():
    deck = cards.instantiate_deck()
    for raw, _ in deck.entries:
        d = cards.definition(raw)
        assert d.deck_count >= 1
        assert not d.supplemental


def test_raw_spellings_survive_and_normalize():
    deck = cards.instantiate_deck()
    names = {n for n, _ in deck.entries}
    m = cards.normalization_map()
    assert m["Choak"] == "Choke"
    for raw, fixed in m.items():
        assert cards.definition(raw).name == fixed
    assert {cards.normalize(n) for n in names} >= {"Choke", "Privileged Position", "Xathrid Necromancer"}
    assert cards.normalize("Choak") == "Choke"


def test_every_definition_has_text_and_scripts():
    lib = cards.library()
    assert len(lib) == 65
    for name, d in lib.items():
        assert d.text
        assert d.types
        for ab in d.abilities:
            assert ab.kind


def test_supplements_are_flagged():
    sup = cards.supplements()
    assert "Night of Souls' Betrayal" in sup
    assert "Human Frailty" in sup
    for name in sup:
        assert cards.definition(name).deck_count == 0


def test_unknown_card_rejected():
    with pytest.raises(KeyError):
        cards.definition("Black Lotus")
    assert cards.is_known("Aetherborn Token")


# --------------------------------------------------------- watchers

def _rotlung(state, *edits, controller=E.ALICE):
    w = E.create_permanent(state, "Rotlung Reanimator", controller)
    w.text_edits = list(edits)
    return w


def _dead(types, token=True):
    return E.Permanent(500, "x", E.BOB, E.BOB, ["creature"], list(types), ["white"], 2, 2, is_token=token)


def test_unedited_rotlung_sees_cleric():
    s = E.new_game()
    _rotlung(s)
    specs = cards.death_trigger_tokens(s, _dead(["Cleric"]))
    assert len(specs) == 1
    sp = specs[0]
    assert (sp.power, sp.toughness, sp.creature_types, sp.colors) == (2, 2, ["Zombie"], ["black"])


def test_edited_rotlung_worked_example():
    s = E.new_game()
    _rotlung(s, E.TextEdit("replace_creature_type", "Cleric", "Aetherborn"),
             E.TextEdit("replace_creature_type", "Zombie", "Sliver"),
             E.TextEdit("replace_color_word", "black", "white"))
    specs = cards.death_trigger_tokens(s, _dead(["Aetherborn"]))
    assert [(sp.creature_types, sp.colors) for sp in specs] == [(["Sliver"], ["white"])]
    assert cards.death_trigger_tokens(s, _dead(["Cleric"])) == []


def test_phased_out_watcher_is_silent():
    s = E.new_game()
    w = _rotlung(s)
    E.set_phased(s, w, True)
    assert cards.death_trigger_tokens(s, _dead(["Cleric"])) == []


def test_dying_watcher_sees_itself():
    s = E.new_game()
    w = _rotlung(s)
    E.add_counters(s, w, E.MINUS, 2)
    E.settle(s)
    assert [e.source for e in s.stack] == ["watcher"]


def test_grave_betrayal_ignores_tokens():
    s = E.new_game()
    E.create_permanent(s, "Grave Betrayal", E.BOB)
    ev_token = E.DeathEvent(_dead(["Sliver"], token=True))
    ev_card = E.DeathEvent(E.Permanent(7, "Rotlung Reanimator", E.ALICE, E.ALICE, ["creature"], [], [], 2, 2))
    assert cards.death_triggers(s, ev_token) == []
    trig = cards.death_triggers(s, ev_card)
    assert sorted(t.kind for t in trig) == ["grave_betrayal", "watcher"]


# --------------------------------------------------------- counters

def _suspended(n):
    s = E.new_game()
    card = E.ExiledCard("Human Frailty", E.ALICE, time_counters=n, suspended=True)
    s.exile_zone.append(card)
    return s, card


def test_clockspinning_remove():
    s, card = _suspended(3)
    s2 = cards.clockspinning_adjust(s, card, add=False)
    assert s2.exile_zone[0].time_counters == 2
    assert s.exile_zone[0].time_counters == 3


def test_clockspinning_add():
    s, card = _suspended(3)
    s2 = cards.clockspinning_adjust(s, card, add=True)
    assert s2.exile_zone[0].time_counters == 4


def test_clockspinning_counterless_target():
    s = E.new_game()
    moat = E.create_permanent(s, "Moat", E.ALICE)
    with pytest.raises(E.RulesError):
        cards.clockspinning_adjust(s, moat.id, add=True)


def test_clockspinning_on_permanent():
    s = E.new_game()
    gb = E.create_permanent(s, "Grave Betrayal", E.BOB)
    acid = E.create_permanent(s, "Reality Acid", E.BOB, counters={E.TIME: 3})
    acid.attached_to = gb.id
    s2 = cards.clockspinning_adjust(s, acid.id, add=False)
    assert s2.battlefield[acid.id].count(E.TIME) == 2


def test_clockspinning_needs_kind_when_ambiguous():
    s = E.new_game()
    p = E.create_permanent(s, "Daggerdrome Imp", E.ALICE, counters={E.PLUS: 1, E.PREY: 1})
    with pytest.raises(E.RulesError):
        cards.clockspinning_adjust(s, p.id, add=True)
    s2 = cards.clockspinning_adjust(s, p.id, add=True, kind=E.PREY)
    assert s2.battlefield[p.id].count(E.PREY) == 2


# ------------------------------------------------------ control swap

def test_cruel_entertainment_swap_before_bobs_turn():
    s = E.new_game()
    s.phase_step = "cleanup"
    s2 = cards.cruel_entertainment_swap(s, E.ALICE, E.BOB)
    E._advance_inplace(s2)
    assert s2.active_player == E.BOB and s2.turn_controller == E.ALICE
    s2.phase_step = "cleanup"
    E._advance_inplace(s2)
    assert s2.active_player == E.ALICE and s2.turn_controller == E.BOB
    s2.phase_step = "cleanup"
    E._advance_inplace(s2)
    assert s2.turn_controller == s2.active_player


def test_no_swap_means_self_control():
    s = E.new_game()
    for _ in range(4):
        s.phase_step = "cleanup"
        E._advance_inplace(s)
        assert s.turn_controller == s.active_player


def test_swap_needs_two_players():
    with pytest.raises(E.RulesError):
        cards.cruel_entertainment_swap(E.new_game(), E.ALICE, E.ALICE)


def test_universal_round_input_chosen_by_bob():
    s = C.compile_mate_in_n("E y1 A y2 : (y1*y2 - y2 = 0)")
    deciders = {}

    def choose(st, dec, acts):
        if any(a.kind == "choose_integer" for a in acts):
            deciders[st.round] = (st.active_player, acts[0].decider)
            return E.choose_integer(acts[0].player, acts[0].decider, 1)
        if dec.kind == "choice":
            return next(a for a in acts if a.kind == "cast")
        return acts[0]

    E.drive(s, choose, stop=lambda st: st.round > 2)
    assert deciders == {1: (E.ALICE, E.ALICE), 2: (E.ALICE, E.BOB)}


# ------------------------------------------------------- cleanup chain

@pytest.fixture(scope="module")
def after_chain():
    s = C.compile_mate_in_n("E y1 A y2 E y3 : (y1 + y2 - y3 - x = 0)")
    return s, cards.cleanup_chain_effects(s, pump=1)


def _through_first_infest(state):
    s = state.copy()
    stats = H.RunStats()
    H._play(s, lambda st, d, a: H._mirror_action(a, "cast"),
            lambda st: stats.first_infest is not None and not st.stack, 200_000, stats)
    return s, stats


def test_cleanup_at_activation_leaves_only_the_sliver(after_chain):
    _, post = after_chain
    census = C.cleanup_audit(post)
    assert [g.split("#")[0] for g in census["gadget"]] == ["Ghostflame Sliver"]
    assert census["prey_survivors"] == [] and census["tokens_in_graveyards"] == []


def test_cleanup_after_first_infest_is_clean(after_chain):
    _, post = after_chain
    s, stats = _through_first_infest(post)
    census = C.cleanup_audit(s)
    assert census["clean"], census
    assert census["mirror residue"] >= 2
    assert census["machine"] > 0 and census["tape"] > 0
    assert stats.first_infest["round"] == post.meta["n"] + 1


def test_cleanup_destroys_every_prey_object(after_chain):
    pre, post = after_chain
    prey_before = [p.id for p in pre.battlefield.values() if p.count(E.PREY)]
    assert prey_before
    assert not any(pid in post.battlefield for pid in prey_before)
    assert not any(c.endswith(cards.TOKEN_SUFFIX) for pl in post.players for c in pl.graveyard)


def test_cleanup_ends_at_activation(after_chain):
    _, post = after_chain
    assert scripts.activation_complete(post)
    assert post.round == post.meta["n"] + 1
    assert post.named("Maralen of the Mornsong") == []
    assert post.named("Timelock Orb") != []


def test_infest_is_drawn_once_maralen_is_gone(after_chain):
    _, post = after_chain
    assert "Infest" in post.players[E.ALICE].library
    s, stats = _through_first_infest(post)
    assert stats.first_infest["active"] == E.ALICE
    assert "Infest" not in s.players[E.ALICE].hand


def test_cleanup_rejects_unforced_branch():
    s = E.new_game()
    s.meta["n"] = 1
    E.create_permanent(s, "Daggerdrome Imp", E.ALICE)
    E.create_permanent(s, "Rotlung Reanimator", E.ALICE)
    s.phase_step = "main1"
    with pytest.raises(cards.ForcednessError):
        cards.cleanup_chain_effects(s)
