"""Effect procedures for the scripted cards.

The engine calls into this module for four things: the actions a player may
take with priority, spell resolution, ability resolution, and casting a
suspended card whose last time counter came off.
"""
from __future__ import annotations

from .. import engine as E
from . import TOKEN_SUFFIX, definition

ALL_COLORS = "+".join(E.COLORS)
BASIC_TYPES = ("Plains", "Island", "Swamp", "Mountain", "Forest")


# ------------------------------------------------------------ queries

def land_types(state, p):
    types = set()
    if p.name == "Swamp":
        types.add("Swamp")
    if any(o.controller == p.controller for o in state.named("Prismatic Omen")):
        types.update(BASIC_TYPES)
    return types


def controlled_lands(state, player):
    return [p for p in E.live_controlled(state, player) if "land" in p.card_types]


def coalition_ready(state, player):
    lands = set()
    for land in controlled_lands(state, player):
        lands |= land_types(state, land)
    if not set(BASIC_TYPES) <= lands:
        return False
    seen = set()
    for p in E.live_controlled(state, player):
        if p.is_creature():
            seen |= E.colors(state, p)
            if len(seen) == 5:
                return True
    return False


def hexproof_from(state, p, caster):
    return p.controller != caster and E.has_keyword(state, p, "hexproof")


def spell_targets(state, card, caster):
    """Legal targets for the targeted spells in scope, or None for untargeted spells."""
    if card == "Human Frailty":
        return [p.id for pid, p in sorted(state.live.items())
                if p.is_creature() and "Human" in E.creature_types(p) and not hexproof_from(state, p, caster)]
    if card == "Infernal Reckoning":
        return [p.id for pid, p in sorted(state.live.items())
                if p.is_creature() and not E.colors(state, p) and not hexproof_from(state, p, caster)]
    return None


RESTRICTIONS = {"Human Frailty": "human", "Infernal Reckoning": "colorless"}


def pump_source(state, player):
    """The attacking creature carrying Shade's Form, if the mana engine can feed it."""
    if state.phase_step != "declare_blockers" or not state.combat.get("blocks_declared"):
        return None
    if state.combat.get("pumped"):
        return None
    magus = [m for m in state.named("Magus of the Coffers") if m.controller == player
             and any(state.battlefield[a].name == "Umbral Mantle" for a in m.attachments if a in state.live)]
    if not magus:
        return None
    lands = controlled_lands(state, player)
    if not any("Swamp" in land_types(state, l) for l in lands) or not any(not l.tapped for l in lands):
        return None
    for aid in state.combat.get("attackers", []):
        a = state.live.get(aid)
        if a and a.controller == player and any(
                state.battlefield[x].name == "Shade's Form" for x in a.attachments if x in state.live):
            return a
    return None


def needle_names(state):
    return {n.extra.get("named") for n in state.by_name.get("Pithing Needle", {}).values()}


# ----------------------------------------------------------- priority

def priority_actions(state, player, decider):
    acts = []
    sorcery_ok = (player == state.active_player and state.phase_step in ("main1", "main2") and not state.stack)
    hand = state.players[player].hand
    if sorcery_ok:
        if "Coalition Victory" in hand and coalition_ready(state, player):
            return [E.Action("cast", player, decider, card="Coalition Victory")]
        if "Infest" in hand:
            return [E.Action("cast", player, decider, card="Infest")]
        for h in state.named("Helm of the Host"):
            if h.controller == player and "Helm of the Host" not in needle_names(state):
                for c in E.live_controlled(state, player):
                    if c.is_creature() and c.id != h.attached_to:
                        acts.append(E.Action("activate_ability", player, decider, card="Helm of the Host",
                                             targets=(h.id, c.id), payload=None))
    if player == state.active_player and pump_source(state, player) is not None:
        acts.append(E.choose_integer(player, decider))
    acts.append(E.Action("pass_priority", player, decider))
    return acts


def apply_priority_action(state, action):
    p = action.player
    if action.kind == "cast":
        hand = state.players[p].hand
        if action.card not in hand:
            raise E.IllegalAction(f"{action.card} is not in hand")
        hand.remove(action.card)
        state.stack.append(E.StackEntry("spell", action.card, p, owner=p))
        state.emit("cast", card=action.card, player=p)
        return
    if action.kind == "choose_integer":
        if action.payload is None:
            raise E.IllegalAction("choose_integer needs a value")
        imp = pump_source(state, p)
        if imp is None:
            raise E.IllegalAction("no pump available")
        k = action.value
        state.combat["pumped"] = True
        if k > 0:
            land = next(l for l in controlled_lands(state, p) if not l.tapped)
            land.tapped = True
            if land.name == "Ancient Tomb":
                E.lose_life(state, p, 2)
            swamps = sum(1 for l in controlled_lands(state, p) if "Swamp" in land_types(state, l))
            state.emit("mana", player=p, black=k, swamps=swamps)
            state.stack.append(E.StackEntry("ability", "shade_pump", p, [imp.id], {"k": k}, imp.id))
        state.emit("choose_integer", player=p, value=k)
        return
    if action.kind == "activate_ability" and action.card == "Helm of the Host":
        helm_id, target = action.targets
        if "Helm of the Host" in needle_names(state):
            raise E.IllegalAction("Pithing Needle names Helm of the Host")
        state.stack.append(E.StackEntry("ability", "helm_equip", p, [target], {"helm": helm_id}, helm_id))
        return
    raise E.IllegalAction(f"unsupported action {action.to_dict()}")


def apply_choice(state, action):
    choice = state.pending_choice
    state.pending_choice = None
    if choice["kind"] == "choice":
        if action.kind == "cast":
            c = choice["player"]
            state.stack.append(E.StackEntry("spell", choice["card"], c, [f"player:{c}", f"player:{E.other(c)}"],
                                            owner=c, is_copy=True))
            state.emit("cast", card=choice["card"], player=c, copy=True)
        else:
            state.emit("decline", card=choice["card"], player=choice["player"])
        return
    if choice["kind"] == "target":
        _put_targeted_spell(state, choice["card"], choice["player"], choice["owner"], action.targets[0])
        return
    raise E.IllegalAction(f"unknown pending choice {choice}")


# ------------------------------------------------------------ casting

def _put_targeted_spell(state, card, controller, owner, target):
    restriction = RESTRICTIONS.get(card)
    state.stack.append(E.StackEntry("spell", card, controller, [target],
                                    {"restriction": restriction} if restriction else {}, owner=owner))
    state.emit("cast", card=card, player=controller, targets=[target])


def cast_from_exile(state, exiled):
    card, owner = exiled.card, exiled.owner
    targets = spell_targets(state, card, owner)
    if targets is None:
        state.stack.append(E.StackEntry("spell", card, owner, owner=owner))
        state.emit("cast", card=card, player=owner, suspended=True)
    elif not targets:
        exiled.suspended = False
        state.exile_zone.append(exiled)
        state.emit("no_target", card=card)
    elif len(targets) == 1:
        _put_targeted_spell(state, card, owner, owner, targets[0])
    else:
        state.pending_choice = {"kind": "target", "player": owner, "card": card, "owner": owner,
                                "targets": targets}


def _swap(state, first, second):
    state.pending_control[str(second)] = first
    state.pending_control[str(first)] = second
    state.emit("control_swap", first=first, second=second)


def resolve_spell(state, entry):
    card, c = entry.source, entry.controller
    owner = entry.owner if entry.owner is not None else c
    if card == "Infest":
        for p in list(state.live.values()):
            if p.is_creature():
                p.ueot[0] -= 2
                p.ueot[1] -= 2
    elif card == "Coalition Victory":
        if coalition_ready(state, c):
            state.players[c].won_flag = True
            state.emit("win", player=c)
    elif card == "Human Frailty":
        target = state.live[entry.targets[0]]
        E.destroy(state, target, "Human Frailty")
    elif card == "Infernal Reckoning":
        target = state.live[entry.targets[0]]
        power = E.effective_stats(state, target)[0]
        E.exile_permanent(state, target)
        E.gain_life(state, c, max(power, 0))
    elif card == "Cruel Entertainment":
        players = [int(t.split(":")[1]) for t in entry.targets]
        _swap(state, players[0], players[1])
    elif "instant" in definition(card).types or "sorcery" in definition(card).types:
        raise E.RulesError(f"no script for spell {card}")
    else:
        E.create_permanent(state, card, c, owner)
        return
    if not entry.is_copy:
        E._card_to_graveyard(state, owner, card)


# ---------------------------------------------------------- abilities

def resolve_ability(state, entry):
    kind, d = entry.source, entry.pending_choices
    handler = ABILITIES.get(kind)
    if handler is None:
        raise E.RulesError(f"no script for ability {kind}")
    handler(state, entry, d)


def _watcher(state, entry, d):
    name, types, colors, tapped = d["token"]
    spec = E.TokenSpec(name, 2, 2, list(types), list(colors), tapped=tapped)
    tok = E.create_token(state, spec, entry.controller)
    tail = d.get("gadget") or {}
    if tail.get("role") != "watcher":
        return
    E.add_counters(state, tok, E.PLUS, 1)
    if tail.get("halt"):
        tok.text_edits.append(E.TextEdit("set_colors", "", ALL_COLORS))
        state.emit("halt", state=tail["state"], symbol=tail["symbol"])
        return
    meta = state.meta
    meta["machine_steps"] = meta.get("machine_steps", 0) + 1
    if tail["next"] == meta.get("count_state"):
        meta["count_entries"] = meta.get("count_entries", 0) + 1
    direction = "R" if "white" in colors else "L"
    state.delayed.append({"when": "next_upkeep", "kind": "tape_shift", "controller": entry.controller,
                          "source": entry.source_id, "gadget_index": tail.get("index", 0),
                          "data": {"direction": direction}})
    _gate(state, tail["state"], tail["next"])


def _gate(state, q, q2):
    banks = state.meta["banks"]
    for wid in banks[q]:
        w = state.battlefield[wid]
        if w.phasing == "curse":
            w.phasing = None
    if q2 != q:
        for wid in banks[q] + banks[q2]:
            state.battlefield[wid].phasing = "gate"


def is_tape_cell(state, p):
    tags = state.meta.get("tag_symbols")
    if not tags or not p.is_token or p.name == "Rotlung Reanimator" or p.count(E.PREY):
        return False
    return p.controller == state.meta.get("tape_controller", E.ALICE) and bool(E.creature_types(p) & tags.keys())


def position_of(state, p):
    """Distance from the head encoded by a tape cell (until-end-of-turn effects ignored)."""
    t = E.effective_stats(state, p)[1] - p.ueot[1]
    return t - 2


def _tape_shift(state, entry, d):
    grow, shrink = ("white", "green") if d["direction"] == "R" else ("green", "white")
    for pid in sorted(state.live):
        p = state.live[pid]
        if not p.is_creature():
            continue
        cs = E.colors(state, p)
        if grow in cs:
            E.add_counters(state, p, E.PLUS, 1)
        if shrink in cs:
            E.add_counters(state, p, E.MINUS, 1)
    if not any(is_tape_cell(state, p) and position_of(state, p) == 0 for p in state.live.values()):
        blank = state.meta["symbol_tags"][state.meta["blank"]]
        tok = E.create_token(state, E.TokenSpec(f"{blank}{TOKEN_SUFFIX}", 2, 2, [blank], ["green"]),
                             entry.controller)
        E.add_counters(state, tok, E.PLUS, 1)


def _grave_betrayal(state, entry, d):
    state.delayed.append({"when": "next_end_step", "kind": "gb_return", "controller": entry.controller,
                          "source": entry.source_id, "data": dict(d)})


def _gb_return(state, entry, d):
    gy = state.players[d["owner"]].graveyard
    if d["card"] not in gy:
        state.emit("gb_miss", card=d["card"])
        return
    gy.remove(d["card"])
    p = E.create_permanent(state, d["card"], entry.controller, d["owner"])
    p.sick = True
    E.add_counters(state, p, E.PLUS, 1)
    p.extra["add_types"] = ["Zombie"]
    p.extra["add_colors"] = ["black"]
    state.emit("enter", id=p.id, name=p.name, controller=p.controller)
    if p.name == "Tetzimoc, Primal Death":
        state.pending_triggers.append(E.TriggerInstance("tetzimoc_etb", p.controller, p.id, {}, p.gadget_index))


def _tetzimoc(state, entry, d):
    doomed = [p for pid, p in sorted(state.live.items())
              if p.is_creature() and p.controller != entry.controller and p.count(E.PREY)]
    events = []
    for p in doomed:
        snap = E.leave_to_graveyard(state, p, "Tetzimoc")
        state.emit("leave", id=snap.id, name=snap.name, cause="destroy", token=snap.is_token)
        events.append(E.DeathEvent(snap, "destroy"))
    E._collect_death_triggers(state, events)


def _ageless(state, entry, d):
    p = state.live.get(entry.source_id)
    if p is not None:
        E.add_counters(state, p, E.PLUS, d["amount"])


def _helm_copy(state, entry, d):
    h = state.live.get(entry.source_id)
    if h is None or h.attached_to is None or h.attached_to not in state.live:
        return
    E.token_copy(state, state.live[h.attached_to], h.controller)


def _helm_equip(state, entry, d):
    h = state.live.get(d["helm"])
    target = state.live.get(entry.targets[0])
    if h is None or target is None:
        return
    if h.attached_to is not None and h.attached_to in state.battlefield:
        state.battlefield[h.attached_to].attachments.remove(h.id)
    h.attached_to = target.id
    target.attachments.append(h.id)


def _maralen(state, entry, d):
    player = d["player"]
    E.lose_life(state, player, 3)
    if state.by_name.get("Timelock Orb"):
        return
    lib = state.players[player].library
    if lib:
        state.players[player].hand.append(lib.pop(0))


def write_gadget_live(state, player):
    return any(h.attached_to is not None and h.attached_to in state.live
               for h in state.named("Helm of the Host"))


def _mirror(state, entry, d):
    m = state.live.get(entry.source_id)
    if m is None:
        return
    card = m.extra.get("imprint")
    if not write_gadget_live(state, m.controller):
        state.emit("decline", card=card, player=m.controller, auto=True)
        return
    state.pending_choice = {
        "kind": "choice", "player": m.controller, "card": card,
        "options": [{"kind": "cast", "card": card, "payload": None},
                    {"kind": "pass_priority", "card": card, "payload": None}],
    }


def _acid_leaves(state, entry, d):
    p = state.live.get(d["target"])
    if p is None:
        return
    snap = E.leave_to_graveyard(state, p, "sacrifice")
    state.emit("leave", id=snap.id, name=snap.name, cause="sacrifice", token=snap.is_token)
    if snap.is_creature():
        E._collect_death_triggers(state, [E.DeathEvent(snap, "sacrifice")])


def _shade_pump(state, entry, d):
    p = state.live.get(entry.targets[0])
    if p is not None:
        p.ueot[0] += d["k"]
        p.ueot[1] += d["k"]


ABILITIES = {
    "watcher": _watcher,
    "tape_shift": _tape_shift,
    "grave_betrayal": _grave_betrayal,
    "gb_return": _gb_return,
    "tetzimoc_etb": _tetzimoc,
    "ageless_gain": _ageless,
    "helm_copy": _helm_copy,
    "helm_equip": _helm_equip,
    "maralen_draw": _maralen,
    "mirror_upkeep": _mirror,
    "reality_acid_leaves": _acid_leaves,
    "shade_pump": _shade_pump,
}


def activation_complete(state):
    """True at the first cycle boundary after the countdown ran out."""
    n = state.meta.get("n")
    return (n is not None and state.round > n and state.active_player == E.ALICE
            and state.phase_step == "untap" and not state.stack)
