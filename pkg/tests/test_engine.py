import pytest

from mtgmate import engine as E
from mtgmate import compiler as C
from mtgmate.cards import TOKEN_SUFFIX


def bare():
    return E.new_game()


def token(state, name="Sliver", counters=None, controller=E.ALICE, colors=("white",)):
    spec = E.TokenSpec(f"{name}{TOKEN_SUFFIX}", 2, 2, [name], list(colors), counters=dict(counters or {}))
    return E.create_token(state, spec, controller)


def record(state):
    log = []
    state.sink = lambda st, ev, info: log.append((ev, info))
    return log


# ---------------------------------------------------------------- SBA

def test_starting_life_is_twenty():
    s = bare()
    assert [p.life for p in s.players] == [20, 20]
    assert [p.poison for p in s.players] == [0, 0]


def test_counter_annihilation():
    s = bare()
    t = token(s, counters={E.PLUS: 3, E.MINUS: 2})
    s2, events = E.apply_state_based_actions(s)
    assert s2.battlefield[t.id].counters == {E.PLUS: 1}
    assert events == []
    # the input state is untouched
    assert s.battlefield[t.id].counters == {E.PLUS: 3, E.MINUS: 2}


def test_sba_identity_when_nothing_applies():
    s = bare()
    token(s)
    s2, events = E.apply_state_based_actions(s)
    assert events == []
    assert s2.to_json() == s.to_json()


def test_token_at_zero_toughness_ceases_to_exist():
    s = bare()
    t = token(s, counters={E.MINUS: 2})
    s2, events = E.apply_state_based_actions(s)
    assert t.id not in s2.battlefield
    assert len(events) == 1 and events[0].permanent.id == t.id
    assert all(not pl.graveyard for pl in s2.players)


def test_nontoken_creature_goes_to_owner_graveyard():
    s = bare()
    p = E.create_permanent(s, "Rotlung Reanimator", E.ALICE, owner=E.BOB)
    E.add_counters(s, p, E.MINUS, 2)
    s2, _ = E.apply_state_based_actions(s)
    assert s2.players[E.BOB].graveyard == ["Rotlung Reanimator"]
    assert s2.players[E.ALICE].graveyard == []


def test_ten_poison_loses():
    s = bare()
    s.players[E.BOB].poison = 9
    s2, _ = E.apply_state_based_actions(s)
    assert not s2.game_over
    s.players[E.BOB].poison = 10
    s2, _ = E.apply_state_based_actions(s)
    assert s2.players[E.BOB].lost_flag and s2.winner == E.ALICE


def test_zero_life_loses():
    s = bare()
    s.players[E.ALICE].life = 0
    s2, _ = E.apply_state_based_actions(s)
    assert s2.winner == E.BOB


def test_token_exile_leaves_no_card_anywhere():
    s = bare()
    t = token(s)
    E.exile_permanent(s, t)
    assert s.exile_zone == []
    assert all(not pl.graveyard and not pl.library and not pl.hand for pl in s.players)


def test_token_destroyed_under_wheel_not_put_in_library():
    s = bare()
    w = E.create_permanent(s, "Wheel of Sun and Moon", E.ALICE)
    w.extra["enchanted_player"] = E.ALICE
    t = token(s)
    E.destroy(s, t)
    assert s.players[E.ALICE].library == [] and s.players[E.ALICE].graveyard == []


# -------------------------------------------------------- characteristics

def test_effective_stats_ageless_entity_under_night():
    s = bare()
    E.create_permanent(s, "Night of Souls' Betrayal", E.BOB)
    src = E.create_permanent(s, "Ageless Entity", E.ALICE)
    copy = E.token_copy(s, src, E.ALICE)
    assert E.effective_stats(s, copy) == (3, 3)


def test_effective_stats_imp_with_counter_under_night():
    s = bare()
    E.create_permanent(s, "Night of Souls' Betrayal", E.BOB)
    imp = E.create_permanent(s, "Daggerdrome Imp", E.ALICE, counters={E.PLUS: 1})
    assert E.effective_stats(s, imp) == (1, 1)


def test_effective_stats_plain():
    s = bare()
    t = E.create_permanent(s, "Tetzimoc, Primal Death", E.BOB)
    assert E.effective_stats(s, t) == (6, 6)


def test_effective_stats_rejects_noncreature():
    s = bare()
    moat = E.create_permanent(s, "Moat", E.ALICE)
    with pytest.raises(E.RulesError):
        E.effective_stats(s, moat)


# ------------------------------------------------------------- the stack

def test_apnap_nonactive_trigger_resolves_first():
    s = bare()
    t1 = E.TriggerInstance("probe", E.ALICE, None, {"tag": "T1"})
    t2 = E.TriggerInstance("probe", E.BOB, None, {"tag": "T2"})
    s2 = E.push_triggers(s, [t2, t1])
    assert [e.pending_choices["tag"] for e in s2.stack] == ["T1", "T2"]
    assert s2.stack[-1].controller == E.BOB


def test_same_controller_triggers_ordered_by_gadget_index():
    s = bare()
    a = E.TriggerInstance("probe", E.ALICE, 1, {"tag": "five"}, gadget_index=5)
    b = E.TriggerInstance("probe", E.ALICE, 2, {"tag": "two"}, gadget_index=2)
    s2 = E.push_triggers(s, [a, b])
    assert [e.pending_choices["tag"] for e in s2.stack] == ["two", "five"]


def test_single_trigger_pushed_alone():
    s = bare()
    s2 = E.push_triggers(s, [E.TriggerInstance("probe", E.BOB)])
    assert len(s2.stack) == 1


def test_stack_is_lifo():
    s = bare()
    a = token(s, "Aetherborn")
    b = token(s, "Sliver")
    s.stack = [E.StackEntry("ability", "shade_pump", E.ALICE, [a.id], {"k": 1}),
               E.StackEntry("ability", "shade_pump", E.ALICE, [b.id], {"k": 5})]
    s2 = E.resolve_top(s)
    assert s2.battlefield[b.id].ueot == [5, 5]
    assert s2.battlefield[a.id].ueot == [0, 0]
    assert len(s2.stack) == 1


def test_empty_effect_only_pops():
    s = bare()
    s.stack = [E.StackEntry("ability", "mirror_upkeep", E.BOB, [], {}, source_id=999)]
    s2 = E.resolve_top(s)
    assert s2.stack == []
    assert s2.battlefield == s.battlefield


def test_fizzle_when_sole_target_gone():
    s = bare()
    t = token(s)
    s.stack = [E.StackEntry("ability", "shade_pump", E.ALICE, [t.id], {"k": 3})]
    E.destroy(s, s.battlefield[t.id])
    log = record(s)
    E._resolve_top_inplace(s)
    assert s.stack == []
    assert ("fizzle", {"source": "shade_pump"}) in log


def test_resolve_top_empty_stack_errors():
    with pytest.raises(E.RulesError):
        E.resolve_top(bare())


# ------------------------------------------------------------- phasing

def test_phasing_period_two():
    s = bare()
    w = E.create_permanent(s, "Rotlung Reanimator", E.ALICE, phasing="curse")
    seen = []
    for _ in range(6):
        s.phase_step, s.active_player = "cleanup", E.BOB
        E._advance_inplace(s)       # Alice's untap step
        seen.append(s.battlefield[w.id].phased_out)
    assert seen == [True, False, True, False, True, False]


def test_gate_phasing_toggles_once():
    s = bare()
    w = E.create_permanent(s, "Rotlung Reanimator", E.ALICE, phasing="gate")
    seen = []
    for _ in range(3):
        s.phase_step, s.active_player = "cleanup", E.BOB
        E._advance_inplace(s)
        seen.append(s.battlefield[w.id].phased_out)
    assert seen == [True, True, True]


def test_phased_out_permanent_keeps_text_edits_and_is_invisible():
    s = bare()
    w = E.create_permanent(s, "Rotlung Reanimator", E.ALICE)
    w.text_edits = [E.TextEdit("replace_creature_type", "Cleric", "Aetherborn")]
    E.set_phased(s, w, True)
    assert s.named("Rotlung Reanimator") == []
    E.set_phased(s, w, False)
    assert s.named("Rotlung Reanimator")[0].text_edits == w.text_edits


def test_untap_step_phases_controller_permanents():
    s = bare()
    w = E.create_permanent(s, "Rotlung Reanimator", E.BOB, phasing="curse")
    s.phase_step = "cleanup"
    E._advance_inplace(s)           # Bob's turn begins
    assert s.active_player == E.BOB and s.phase_step == "untap"
    assert s.battlefield[w.id].phased_out


# ------------------------------------------------------------- text edits

def test_rotlung_edit_rendering():
    p = E.Permanent(1, "Rotlung Reanimator", E.ALICE, E.ALICE, ["creature"], ["Zombie", "Cleric"], ["black"], 2, 2)
    for e in (E.TextEdit("replace_creature_type", "Cleric", "Aetherborn"),
              E.TextEdit("replace_creature_type", "Zombie", "Sliver"),
              E.TextEdit("replace_color_word", "black", "white")):
        p = E.apply_text_edit(p, e)
    text = "Whenever Rotlung Reanimator or another Cleric dies, create a 2/2 black Zombie creature token."
    assert E.render_text(p, text) == ("Whenever Rotlung Reanimator or another Aetherborn dies, "
                                      "create a 2/2 white Sliver creature token.")


def test_identity_edit_leaves_text_alone():
    p = E.Permanent(1, "Rotlung Reanimator", E.ALICE, E.ALICE, ["creature"], ["Zombie", "Cleric"], ["black"], 2, 2)
    text = "Whenever Rotlung Reanimator or another Cleric dies, create a 2/2 black Zombie creature token."
    q = E.apply_text_edit(p, E.TextEdit("replace_creature_type", "Cleric", "Cleric"))
    assert E.render_text(q, text) == text
    assert p.text_edits == []


def test_wall_is_not_a_legal_new_type():
    with pytest.raises(E.IllegalAction):
        E.TextEdit("replace_creature_type", "Cleric", "Wall")


def test_text_edits_lost_on_zone_change():
    s = bare()
    p = E.create_permanent(s, "Rotlung Reanimator", E.ALICE)
    p.text_edits = [E.TextEdit("replace_creature_type", "Cleric", "Aetherborn")]
    E.destroy(s, p)
    card = s.players[E.ALICE].graveyard.pop()
    back = E.create_permanent(s, card, E.ALICE)
    assert back.text_edits == []
    assert back.id != p.id


def test_grave_betrayal_return_drops_edits():
    s = C.compile_mate_in_n("E y1 : (y1 - 2 = 0)")
    tz = s.named("Tetzimoc, Primal Death")[0]
    assert tz.text_edits
    E.drive(s, lambda st, d, a: E.choose_integer(a[0].player, a[0].decider, 2)
            if any(x.kind == "choose_integer" for x in a) else a[0],
            stop=lambda st: any(p.controller == E.BOB for p in st.named("Tetzimoc, Primal Death")))
    back = [p for p in s.named("Tetzimoc, Primal Death") if p.controller == E.BOB][0]
    assert back.id != tz.id
    assert back.text_edits == []


# ----------------------------------------------------------- turn steps

def test_suspend_last_counter_casts():
    s = bare()
    s.exile_zone.append(E.ExiledCard("Choke", E.ALICE, time_counters=1, suspended=True))
    s.phase_step = "untap"
    log = record(s)
    E._advance_inplace(s)            # upkeep
    assert s.exile_zone == []
    assert any(ev == "cast" and info["card"] == "Choke" for ev, info in log)
    assert [e.source for e in s.stack] == ["Choke"]


def test_maralen_with_timelock_orb_keeps_hand_empty():
    s = bare()
    E.create_permanent(s, "Maralen of the Mornsong", E.BOB)
    E.create_permanent(s, "Timelock Orb", E.BOB)
    s.players[E.ALICE].library = ["Infest"]
    s.phase_step = "upkeep"
    E.drive(s, lambda st, d, a: a[0], stop=lambda st: st.phase_step == "main1")
    assert s.players[E.ALICE].hand == []
    assert s.players[E.ALICE].life == 17


def test_draw_without_maralen():
    s = bare()
    s.players[E.ALICE].library = ["Infest", "Human Frailty"]
    s.phase_step = "upkeep"
    E._advance_inplace(s)
    assert s.players[E.ALICE].hand == ["Infest"]


# ------------------------------------------------------------- decisions

def test_only_pass_when_nothing_castable():
    s = bare()
    s.phase_step = "main1"
    s.priority = E.ALICE
    acts = E.legal_actions(s)
    assert [a.kind for a in acts] == ["pass_priority"]


def test_hellraiser_moat_force_imp_attack():
    s = bare()
    E.create_permanent(s, "Moat", E.BOB)
    E.create_permanent(s, "Hellraiser Goblin", E.ALICE)
    imp = E.create_permanent(s, "Daggerdrome Imp", E.ALICE)
    E.create_permanent(s, "Rotlung Reanimator", E.ALICE)
    s.phase_step = "main1"
    E.drive(s, lambda st, d, a: a[0], stop=lambda st: (E.pending_decision(st) or E.Decision(0, 0, "")).kind
            == "attackers")
    acts = E.legal_actions(s)
    assert len(acts) == 1
    assert acts[0].kind == "declare_attackers" and acts[0].attackers == (imp.id,)


def test_pump_window_offers_integer_and_pass():
    s = C.compile_mate_in_n("E y1 : (y1 = 0)")
    E.drive(s, lambda st, d, a: a[0], stop=lambda st: len(E.legal_actions(st)) > 1)
    kinds = [a.kind for a in E.legal_actions(s)]
    assert kinds == ["choose_integer", "pass_priority"]
    assert E.legal_actions(s)[0].payload is None


def test_integer_payload_is_binary():
    a = E.choose_integer(E.ALICE, E.ALICE, 6)
    assert a.payload == "110" and a.value == 6
    with pytest.raises(ValueError):
        E.Action("choose_integer", E.ALICE, E.ALICE, payload="012")


def test_wrong_decider_sees_no_actions():
    s = bare()
    s.phase_step = "main1"
    s.priority = E.ALICE
    assert E.legal_actions(s, decider=E.BOB) == []
    s.turn_controller = E.BOB
    assert len(E.legal_actions(s, decider=E.BOB)) == 1


# ---------------------------------------------------------------- combat

def _to_combat(sentence="E y1 : (y1 - 2 = 0)"):
    s = C.compile_mate_in_n(sentence)
    E.drive(s, lambda st, d, a: a[0], stop=lambda st: st.phase_step == "begin_combat")
    return s


def test_resolve_combat_pump_three():
    s = _to_combat()
    life = [p.life for p in s.players]
    t = E.resolve_combat(s, 3)
    assert t.players[E.BOB].life == life[E.BOB] - 4
    # lifelink gives 4; tapping an Ancient Tomb for the pump mana costs 2
    assert t.players[E.ALICE].life == life[E.ALICE] + 4 - 2
    entities = t.named("Ageless Entity")
    assert entities and all(e.count(E.PLUS) == 4 for e in entities)


def test_resolve_combat_pump_zero():
    s = _to_combat()
    life = s.players[E.BOB].life
    t = E.resolve_combat(s, 0)
    assert t.players[E.BOB].life == life - 1
    assert all(e.count(E.PLUS) == 1 for e in t.named("Ageless Entity"))


def test_resolve_combat_without_attackers_is_noop():
    s = bare()
    s.phase_step = "begin_combat"
    t = E.resolve_combat(s, 5)
    assert [p.life for p in t.players] == [20, 20]
    assert t.battlefield == {}


def test_resolve_combat_outside_combat_rejected():
    s = bare()
    s.phase_step = "main1"
    with pytest.raises(E.RulesError):
        E.resolve_combat(s, 1)


# --------------------------------------------------------- serialization

def test_state_json_roundtrip():
    s = C.compile_mate_in_n("E y1 A y2 : (y1*y2 - y2 = 0)")
    back = E.GameState.from_json(s.to_json())
    assert back.to_json() == s.to_json()
    assert back.digest() == s.digest()
    assert len(back.live) == len(s.live)


def test_copy_is_independent():
    s = bare()
    t = token(s)
    c = s.copy()
    E.add_counters(c, c.battlefield[t.id], E.PLUS, 2)
    assert s.battlefield[t.id].counters == {}
