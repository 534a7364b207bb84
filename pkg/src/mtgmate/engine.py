"""Deterministic rules core for the card-game fragment the construction needs.

Public operations (``apply_state_based_actions``, ``advance_step``,
``resolve_top`` ...) are pure: they copy the state they are given.  The
in-place twins prefixed with an underscore are what the forced-play driver
uses, since copying a board with hundreds of watchers on every priority pass
would dominate the run time.

Phased-out permanents stay in ``GameState.battlefield`` but are left out of
the ``live`` index, so every rules query skips them, matching "treated as
though they don't exist".
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field, fields

ALICE, BOB = 0, 1
PLAYER_NAMES = ("Alice", "Bob")
STEPS = (
    "untap", "upkeep", "draw", "main1", "begin_combat", "declare_attackers",
    "declare_blockers", "combat_damage", "end_combat", "main2", "end", "cleanup",
)
NO_PRIORITY = {"untap", "cleanup"}
COLORS = ("white", "blue", "black", "red", "green")
PLUS, MINUS, PREY, TIME = "+1/+1", "-1/-1", "prey", "time"
COUNTER_KINDS = (PLUS, MINUS, PREY, TIME)
WALL = "Wall"
ACTION_KINDS = (
    "cast", "activate_ability", "choose_integer", "choose_target", "pass_priority",
    "declare_attackers", "declare_blockers", "order_triggers",
)
_BINARY = re.compile(r"^(0|1[01]*)$")


class RulesError(Exception):
    pass


class IllegalAction(RulesError):
    pass


def other(player):
    return 1 - player


# ------------------------------------------------------------------ types

@dataclass
class PlayerState:
    life: int = 20
    poison: int = 0
    hand: list = field(default_factory=list)
    library: list = field(default_factory=list)
    graveyard: list = field(default_factory=list)
    lost_flag: bool = False
    won_flag: bool = False

    def copy(self):
        return PlayerState(self.life, self.poison, list(self.hand), list(self.library),
                           list(self.graveyard), self.lost_flag, self.won_flag)


@dataclass(frozen=True)
class TextEdit:
    kind: str
    from_tag: str
    to_tag: str

    KINDS = ("replace_creature_type", "replace_color_word", "set_colors", "add_creature_type")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown text edit kind {self.kind!r}")
        if self.kind in ("replace_creature_type", "add_creature_type") and self.to_tag == WALL:
            raise IllegalAction("the new creature type can't be Wall")


@dataclass
class Permanent:
    id: int
    definition_id: str
    controller: int
    owner: int
    card_types: list
    creature_types: list = field(default_factory=list)
    colors: list = field(default_factory=list)
    base_power: int | None = None
    base_toughness: int | None = None
    counters: dict = field(default_factory=dict)
    is_token: bool = False
    phased_out: bool = False
    phasing: str | None = None
    attachments: list = field(default_factory=list)
    attached_to: int | None = None
    text_edits: list = field(default_factory=list)
    ueot: list = field(default_factory=lambda: [0, 0])
    damage: int = 0
    tapped: bool = False
    sick: bool = False
    timestamp: int = 0
    gadget_index: int = 0
    gadget: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def name(self):
        return self.definition_id

    def is_creature(self):
        return "creature" in self.card_types

    def copy(self):
        p = Permanent(
            self.id, self.definition_id, self.controller, self.owner, list(self.card_types),
            list(self.creature_types), list(self.colors), self.base_power, self.base_toughness,
            dict(self.counters), self.is_token, self.phased_out, self.phasing, list(self.attachments),
            self.attached_to, list(self.text_edits), list(self.ueot), self.damage, self.tapped,
            self.sick, self.timestamp, self.gadget_index, dict(self.gadget),
            {k: (list(v) if isinstance(v, list) else v) for k, v in self.extra.items()},
        )
        return p

    def count(self, kind):
        return self.counters.get(kind, 0)

    def to_dict(self):
        # hand-rolled rather than asdict(): this runs once per permanent per digest
        d = {f: getattr(self, f) for f in _PERMANENT_FIELDS}
        d["text_edits"] = [[e.kind, e.from_tag, e.to_tag] for e in self.text_edits]
        d["counters"] = {k: v for k, v in sorted(self.counters.items()) if v}
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["text_edits"] = [TextEdit(*e) for e in d["text_edits"]]
        return cls(**d)


_PERMANENT_FIELDS = tuple(f.name for f in fields(Permanent))


@dataclass
class StackEntry:
    kind: str                      # "spell" or "ability"
    source: str                    # card name or ability id
    controller: int
    targets: list = field(default_factory=list)
    pending_choices: dict = field(default_factory=dict)
    source_id: int | None = None
    owner: int | None = None
    is_copy: bool = False

    def to_dict(self):
        return asdict(self)


@dataclass
class ExiledCard:
    card: str
    owner: int
    time_counters: int = 0
    suspended: bool = False
    imprinted_on: int | None = None

    def to_dict(self):
        return asdict(self)


@dataclass
class Action:
    kind: str
    player: int
    decider: int
    card: str | None = None
    targets: tuple = ()
    payload: str | None = None
    attackers: tuple = ()
    blockers: tuple = ()

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "choose_integer" and self.payload is not None and not _BINARY.match(self.payload):
            raise ValueError(f"integer payload must be a canonical binary literal, got {self.payload!r}")

    @property
    def value(self):
        return int(self.payload, 2) if self.payload is not None else None

    def to_dict(self):
        d = {"kind": self.kind, "player": self.player, "decider": self.decider}
        if self.card is not None:
            d["card"] = self.card
        if self.targets:
            d["targets"] = list(self.targets)
        if self.payload is not None:
            d["payload"] = self.payload
        if self.attackers:
            d["attackers"] = list(self.attackers)
        if self.blockers:
            d["blockers"] = [list(b) for b in self.blockers]
        return d


def choose_integer(player, decider, k=None):
    """Integer choices travel as binary literals; ``k=None`` is the open form."""
    return Action("choose_integer", player, decider, payload=None if k is None else format(k, "b"))


@dataclass
class TriggerInstance:
    kind: str
    controller: int
    source_id: int | None = None
    data: dict = field(default_factory=dict)
    gadget_index: int = 0

    def describe(self):
        return {"kind": self.kind, "controller": self.controller, "source": self.source_id,
                "gadget_index": self.gadget_index}


@dataclass
class DeathEvent:
    permanent: Permanent
    cause: str = "sba"

    def to_dict(self):
        p = self.permanent
        return {"id": p.id, "name": p.name, "token": p.is_token, "cause": self.cause}


@dataclass
class TokenSpec:
    name: str
    power: int | None
    toughness: int | None
    creature_types: list
    colors: list
    card_types: list = field(default_factory=lambda: ["creature"])
    tapped: bool = False
    text_edits: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)


@dataclass
class Decision:
    player: int
    decider: int
    kind: str                       # priority | attackers | blockers | choice | target


# --------------------------------------------------------------- the state

@dataclass
class GameState:
    players: list
    battlefield: dict = field(default_factory=dict)
    stack: list = field(default_factory=list)
    exile_zone: list = field(default_factory=list)
    turn_number: int = 1
    active_player: int = ALICE
    turn_controller: int = ALICE
    phase_step: str = "untap"
    priority: int | None = None
    passes: int = 0
    pending_control: dict = field(default_factory=dict)
    delayed: list = field(default_factory=list)
    pending_triggers: list = field(default_factory=list)
    pending_choice: dict | None = None
    combat: dict = field(default_factory=dict)
    next_id: int = 1
    clock: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sink = None
        self.reindex()

    # indexes ---------------------------------------------------------
    def reindex(self):
        self.live = {}
        self.by_name = {}
        for pid in sorted(self.battlefield):
            p = self.battlefield[pid]
            if not p.phased_out:
                self._index(p)

    def _index(self, p):
        self.live[p.id] = p
        self.by_name.setdefault(p.name, {})[p.id] = p

    def _unindex(self, p):
        self.live.pop(p.id, None)
        bucket = self.by_name.get(p.name)
        if bucket is not None:
            bucket.pop(p.id, None)

    def named(self, name):
        """Live permanents with a given card name, in id order."""
        bucket = self.by_name.get(name)
        if not bucket:
            return []
        return [bucket[k] for k in sorted(bucket)]

    # lifecycle -------------------------------------------------------
    def copy(self):
        s = GameState(
            [p.copy() for p in self.players],
            {pid: p.copy() for pid, p in self.battlefield.items()},
            [StackEntry(**asdict(e)) for e in self.stack],
            [ExiledCard(**asdict(e)) for e in self.exile_zone],
            self.turn_number, self.active_player, self.turn_controller, self.phase_step,
            self.priority, self.passes, dict(self.pending_control),
            json.loads(json.dumps(self.delayed)),
            [TriggerInstance(t.kind, t.controller, t.source_id, json.loads(json.dumps(t.data)), t.gadget_index)
             for t in self.pending_triggers],
            json.loads(json.dumps(self.pending_choice)),
            json.loads(json.dumps(self.combat)),
            self.next_id, self.clock, json.loads(json.dumps(self.meta)),
        )
        return s

    def emit(self, event, **info):
        if self.sink is not None:
            self.sink(self, event, info)

    @property
    def round(self):
        return (self.turn_number + 1) // 2

    @property
    def game_over(self):
        return any(p.lost_flag for p in self.players)

    @property
    def winner(self):
        lost = [i for i, p in enumerate(self.players) if p.lost_flag]
        if len(lost) == 1:
            return other(lost[0])
        return None

    # serialization ---------------------------------------------------
    def to_dict(self):
        return {
            "players": [asdict(p) for p in self.players],
            "battlefield": [self.battlefield[k].to_dict() for k in sorted(self.battlefield)],
            "stack": [e.to_dict() for e in self.stack],
            "exile_zone": [e.to_dict() for e in self.exile_zone],
            "turn_number": self.turn_number,
            "active_player": self.active_player,
            "turn_controller": self.turn_controller,
            "phase_step": self.phase_step,
            "priority": self.priority,
            "passes": self.passes,
            "pending_control": self.pending_control,
            "delayed": self.delayed,
            "pending_triggers": [asdict(t) for t in self.pending_triggers],
            "pending_choice": self.pending_choice,
            "combat": self.combat,
            "next_id": self.next_id,
            "clock": self.clock,
            "meta": self.meta,
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent, separators=None if indent else (",", ":"))

    def digest(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d):
        return cls(
            players=[PlayerState(**p) for p in d["players"]],
            battlefield={p["id"]: Permanent.from_dict(p) for p in d["battlefield"]},
            stack=[StackEntry(**e) for e in d["stack"]],
            exile_zone=[ExiledCard(**e) for e in d["exile_zone"]],
            turn_number=d["turn_number"],
            active_player=d["active_player"],
            turn_controller=d["turn_controller"],
            phase_step=d["phase_step"],
            priority=d["priority"],
            passes=d["passes"],
            pending_control={str(k): v for k, v in d["pending_control"].items()},
            delayed=d["delayed"],
            pending_triggers=[TriggerInstance(**t) for t in d["pending_triggers"]],
            pending_choice=d["pending_choice"],
            combat=d["combat"],
            next_id=d["next_id"],
            clock=d["clock"],
            meta=d["meta"],
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def new_game():
    return GameState([PlayerState(), PlayerState()])


_SCRIPTS = None


def _scripts():
    global _SCRIPTS
    if _SCRIPTS is None:
        from .cards import scripts
        _SCRIPTS = scripts
    return _SCRIPTS


# ---------------------------------------------------- characteristics

def edited_word(p, word):
    """Follow ``word`` through the permanent's text edits, in order."""
    for e in p.text_edits:
        if e.kind in ("replace_creature_type", "replace_color_word") and e.from_tag == word:
            word = e.to_tag
    return word


def creature_types(p):
    ts = list(p.creature_types)
    for e in p.text_edits:
        if e.kind == "replace_creature_type":
            ts = [e.to_tag if t == e.from_tag else t for t in ts]
        elif e.kind == "add_creature_type" and e.to_tag not in ts:
            ts.append(e.to_tag)
    for t in p.extra.get("add_types", ()):
        if t not in ts:
            ts.append(t)
    return set(ts)


def colors(state, p):
    """Colors after the type/color stage.

    Within the stage, color-setting text edits come first, then "in addition"
    color grants, then effects that make a permanent colorless.
    """
    cs = set(p.colors)
    for e in p.text_edits:
        if e.kind == "set_colors":
            cs = set(filter(None, e.to_tag.split("+")))
    cs.update(p.extra.get("add_colors", ()))
    if state is not None:
        for g in state.named("Ghostflame Sliver"):
            if edited_word(g, "Sliver") in creature_types(p):
                return set()
    return cs


def render_text(p, text):
    for e in p.text_edits:
        if e.kind in ("replace_creature_type", "replace_color_word"):
            pat = re.compile(r"\b%s(s?)\b" % re.escape(e.from_tag))
            text = pat.sub(lambda m: e.to_tag + m.group(1), text)
    return text


def has_keyword(state, p, kw):
    from .cards import definition
    d = definition(p.name)
    if kw in d.keywords:
        return True
    if kw == "haste":
        return any(h.controller == p.controller for h in state.named("Hellraiser Goblin"))
    if kw == "unblockable":
        return any(state.battlefield[a].name == "Cloak of Mists" for a in p.attachments if a in state.live)
    if kw == "hexproof":
        return any(pp.controller == p.controller and pp.id != p.id for pp in state.named("Privileged Position"))
    return False


def effective_stats(state, p):
    if not p.is_creature():
        raise RulesError(f"{p.name} is not a creature")
    power, tough = p.base_power or 0, p.base_toughness or 0
    net = p.count(PLUS) - p.count(MINUS)
    power += net
    tough += net
    field_mod = len(state.named("Night of Souls' Betrayal"))
    if state.by_name.get("Dread of Night") and "white" in colors(state, p):
        field_mod += len(state.named("Dread of Night"))
    power -= field_mod
    tough -= field_mod
    power += p.ueot[0]
    tough += p.ueot[1]
    return power, tough


# ------------------------------------------------------- zone plumbing

def _tick(state):
    state.clock += 1
    return state.clock


def _put_onto_battlefield(state, p):
    p.id = state.next_id
    state.next_id += 1
    p.timestamp = _tick(state)
    state.battlefield[p.id] = p
    if not p.phased_out:
        state._index(p)
    return p


def create_permanent(state, card, controller, owner=None, **kw):
    from .cards import definition
    d = definition(card)
    p = Permanent(
        0, d.name, controller, controller if owner is None else owner, list(d.types),
        list(d.creature_types), list(d.colors), d.power, d.toughness,
    )
    for k, v in kw.items():
        setattr(p, k, v)
    return _put_onto_battlefield(state, p)


def create_token(state, spec, controller):
    p = Permanent(
        0, spec.name, controller, controller, list(spec.card_types), list(spec.creature_types),
        list(spec.colors), spec.power, spec.toughness, dict(spec.counters), True,
    )
    p.tapped = spec.tapped
    p.sick = True
    p.text_edits = list(spec.text_edits)
    _put_onto_battlefield(state, p)
    state.emit("token", id=p.id, name=p.name, types=sorted(creature_types(p)))
    return p


def token_copy(state, src, controller):
    """Token copy: copiable values (including text edits) but no counters."""
    p = Permanent(
        0, src.name, controller, controller, list(src.card_types), list(src.creature_types),
        list(src.colors), src.base_power, src.base_toughness, {}, True,
    )
    p.text_edits = list(src.text_edits)
    p.sick = True
    p.gadget_index = src.gadget_index
    _put_onto_battlefield(state, p)
    state.emit("token", id=p.id, name=p.name, copy_of=src.id)
    return p


def _card_to_graveyard(state, owner, card):
    wheel = [w for w in state.named("Wheel of Sun and Moon") if w.extra.get("enchanted_player") == owner]
    if wheel:
        state.players[owner].library.append(card)
    else:
        state.players[owner].graveyard.append(card)


def _remove(state, p):
    """Take a permanent off the battlefield; returns its last-known snapshot."""
    snap = p.copy()
    snap.extra["lki_types"] = sorted(creature_types(p))
    snap.extra["lki_colors"] = sorted(colors(state, p))
    state._unindex(p)
    del state.battlefield[p.id]
    if p.attached_to is not None and p.attached_to in state.battlefield:
        host = state.battlefield[p.attached_to]
        if p.id in host.attachments:
            host.attachments.remove(p.id)
    for a in p.attachments:
        if a in state.battlefield:
            state.battlefield[a].attached_to = None
    if p.name == "Reality Acid" and p.attached_to is not None:
        state.pending_triggers.append(TriggerInstance(
            "reality_acid_leaves", p.controller, p.id, {"target": p.attached_to}, p.gadget_index))
    return snap


def leave_to_graveyard(state, p, cause):
    snap = _remove(state, p)
    if not p.is_token:
        _card_to_graveyard(state, p.owner, p.name)
    return snap


def destroy(state, p, cause="destroy"):
    snap = leave_to_graveyard(state, p, cause)
    events = []
    if snap.is_creature():
        events.append(DeathEvent(snap, cause))
    state.emit("leave", id=snap.id, name=snap.name, cause=cause, token=snap.is_token)
    _collect_death_triggers(state, events)
    return events


def exile_permanent(state, p):
    snap = _remove(state, p)
    if not p.is_token:
        state.exile_zone.append(ExiledCard(p.name, p.owner))
    state.emit("leave", id=snap.id, name=snap.name, cause="exile", token=snap.is_token)
    return snap


def set_phased(state, p, out):
    if p.phased_out == out:
        return
    p.phased_out = out
    if out:
        state._unindex(p)
    else:
        state._index(p)
    for a in p.attachments:
        if a in state.battlefield:
            set_phased(state, state.battlefield[a], out)


def add_counters(state, p, kind, n=1):
    if n:
        p.counters[kind] = p.counters.get(kind, 0) + n
        if p.counters[kind] <= 0:
            del p.counters[kind]


def gain_life(state, player, amount):
    if amount <= 0:
        return
    state.players[player].life += amount
    state.emit("life", player=player, delta=amount)
    for e in state.named("Ageless Entity"):
        if e.controller == player:
            state.pending_triggers.append(TriggerInstance(
                "ageless_gain", player, e.id, {"amount": amount}, e.gadget_index))


def lose_life(state, player, amount):
    state.players[player].life -= amount
    state.emit("life", player=player, delta=-amount)


# -------------------------------------------------- state-based actions

def _sba_pass(state):
    """One simultaneous pass; returns (changed, death events)."""
    changed = False
    for i, pl in enumerate(state.players):
        if pl.won_flag and not state.players[other(i)].lost_flag:
            state.players[other(i)].lost_flag = True
            changed = True
        if not pl.lost_flag and (pl.life <= 0 or pl.poison >= 10):
            pl.lost_flag = True
            changed = True
    field_mod = len(state.by_name.get("Night of Souls' Betrayal") or ())
    dread = bool(state.by_name.get("Dread of Night"))
    dying = []
    attached = []
    for pid in sorted(state.live):
        p = state.live[pid]
        c = p.counters
        a, b = c.get(PLUS, 0), c.get(MINUS, 0)
        if a and b:
            m = min(a, b)
            add_counters(state, p, PLUS, -m)
            add_counters(state, p, MINUS, -m)
            changed = True
        if "creature" in p.card_types:
            if dread:
                t = effective_stats(state, p)[1]
            else:
                t = (p.base_toughness or 0) + c.get(PLUS, 0) - c.get(MINUS, 0) - field_mod + p.ueot[1]
            if t <= 0 or (p.damage and p.damage >= t):
                dying.append(p)
        if "aura" in p.card_types or "equipment" in p.card_types:
            attached.append(pid)
    events = []
    for p in dying:
        snap = leave_to_graveyard(state, p, "sba")
        events.append(DeathEvent(snap, "sba"))
        changed = True
    for pid in attached:
        p = state.live.get(pid)
        if p is None:
            continue
        if "aura" in p.card_types and p.extra.get("enchanted_player") is None:
            if p.attached_to is None or p.attached_to not in state.battlefield:
                leave_to_graveyard(state, p, "sba")
                events.append(DeathEvent(p, "aura")) if p.is_creature() else None
                state.emit("leave", id=p.id, name=p.name, cause="unattached aura", token=p.is_token)
                changed = True
        elif "equipment" in p.card_types and p.attached_to is not None:
            host = state.battlefield.get(p.attached_to)
            if host is None or not host.is_creature():
                p.attached_to = None
                changed = True
    return changed, events


def _sba_inplace(state):
    all_events = []
    while True:
        changed, events = _sba_pass(state)
        all_events.extend(events)
        if events:
            state.emit("sba", deaths=[e.to_dict() for e in events])
            _collect_death_triggers(state, events)
        if not changed:
            return all_events


def apply_state_based_actions(state):
    s = state.copy()
    events = _sba_inplace(s)
    s.pending_triggers = list(s.pending_triggers)
    return s, events


def _collect_death_triggers(state, events):
    from .cards import death_triggers
    for ev in events:
        state.pending_triggers.extend(death_triggers(state, ev))


# --------------------------------------------------------- the stack

def _order_key(t):
    return (t.gadget_index, t.source_id if t.source_id is not None else -1)


# Optional observer called with (state, triggers, player) for every batch in
# which one player controls two or more triggers; tests use it to check that
# the canonical order is not hiding a real choice.
ORDER_PROBE = None


def _push_triggers_inplace(state, triggers):
    ap = state.active_player
    mine = sorted((t for t in triggers if t.controller == ap), key=_order_key)
    theirs = sorted((t for t in triggers if t.controller != ap), key=_order_key)
    if ORDER_PROBE is not None:
        for group, who in ((mine, ap), (theirs, other(ap))):
            if len(group) > 1:
                ORDER_PROBE(state, list(triggers), who)
    ordered = mine + theirs
    for t in ordered:
        state.stack.append(StackEntry("ability", t.kind, t.controller, list(t.data.get("targets", [])),
                                      dict(t.data), t.source_id))
    if ordered:
        state.emit("triggers", order=[t.describe() for t in ordered])
    return state


def push_triggers(state, triggers):
    """APNAP: active player's triggers go on the stack first and resolve last."""
    return _push_triggers_inplace(state.copy(), triggers)


def settle(state):
    """Run SBA and put waiting triggers on the stack until nothing changes."""
    while True:
        _sba_inplace(state)
        if state.game_over:
            state.pending_triggers = []
            return
        if not state.pending_triggers:
            return
        batch, state.pending_triggers = state.pending_triggers, []
        _push_triggers_inplace(state, batch)


def target_legal(state, entry, target):
    if isinstance(target, str) and target.startswith("player:"):
        return True
    p = state.live.get(target)
    if p is None:
        return False
    rule = entry.pending_choices.get("restriction")
    if rule == "human":
        return p.is_creature() and "Human" in creature_types(p)
    if rule == "colorless":
        return p.is_creature() and not colors(state, p)
    return True


def _resolve_top_inplace(state):
    if not state.stack:
        raise RulesError("stack is empty")
    entry = state.stack.pop()
    if entry.targets and not any(target_legal(state, entry, t) for t in entry.targets):
        state.emit("fizzle", source=entry.source)
        if entry.kind == "spell" and not entry.is_copy:
            _card_to_graveyard(state, entry.owner if entry.owner is not None else entry.controller, entry.source)
        settle(state)
        return state
    state.emit("resolve", source=entry.source, kind=entry.kind, controller=entry.controller)
    scripts = _scripts()
    if entry.kind == "spell":
        scripts.resolve_spell(state, entry)
    else:
        scripts.resolve_ability(state, entry)
    settle(state)
    return state


def resolve_top(state):
    return _resolve_top_inplace(state.copy())


# --------------------------------------------------------- turn structure

def live_controlled(state, player):
    return [p for pid, p in sorted(state.live.items()) if p.controller == player]


def _begin_turn(state):
    state.turn_number += 1
    state.active_player = other(state.active_player)
    ap = state.active_player
    state.turn_controller = state.pending_control.pop(str(ap), ap)
    state.combat = {}
    state.emit("turn", turn=state.turn_number, active=ap, controller=state.turn_controller)


def _untap_step(state):
    ap = state.active_player
    toggled = []
    for pid in sorted(state.battlefield):
        p = state.battlefield[pid]
        if p.controller == ap and p.phasing and p.attached_to is None:
            toggled.append(p)
    for p in toggled:
        set_phased(state, p, not p.phased_out)
        if p.phasing == "gate":
            p.phasing = None
    if toggled:
        state.emit("phasing", ids=[p.id for p in toggled])
    choke = bool(state.by_name.get("Choke"))
    for p in live_controlled(state, ap):
        if choke and "land" in p.card_types and state.by_name.get("Prismatic Omen"):
            continue
        p.tapped = False
        p.sick = False


def _upkeep_step(state):
    scripts = _scripts()
    ap = state.active_player
    # suspend: one time counter off each suspended card the active player owns
    for card in list(state.exile_zone):
        if card.suspended and card.owner == ap and card.time_counters > 0:
            card.time_counters -= 1
            state.emit("time_counter", card=card.card, left=card.time_counters)
            if card.time_counters == 0:
                state.exile_zone.remove(card)
                scripts.cast_from_exile(state, card)
    for p in list(live_controlled(state, ap)):
        if "vanishing" in p.extra and p.id in state.live:
            add_counters(state, p, TIME, -1)
            state.emit("time_counter", card=p.name, left=p.count(TIME))
            if p.count(TIME) == 0:
                leave_to_graveyard(state, p, "vanishing")
                state.emit("leave", id=p.id, name=p.name, cause="vanishing", token=p.is_token)
    for m in state.named("Panoptic Mirror"):
        if m.controller == ap and m.extra.get("imprint"):
            state.pending_triggers.append(TriggerInstance("mirror_upkeep", ap, m.id, {}, m.gadget_index))
    _fire_delayed(state, "next_upkeep")


def _draw_step(state):
    ap = state.active_player
    maralen = state.named("Maralen of the Mornsong")
    if maralen:
        m = maralen[0]
        state.pending_triggers.append(TriggerInstance("maralen_draw", m.controller, m.id, {"player": ap}, m.gadget_index))
        state.emit("draw_prevented", player=ap)
        return
    lib = state.players[ap].library
    if lib:
        card = lib.pop(0)
        state.players[ap].hand.append(card)
        state.emit("draw", player=ap, card=card)


def _begin_combat(state):
    for h in state.named("Helm of the Host"):
        if h.controller == state.active_player and h.attached_to in state.live:
            state.pending_triggers.append(TriggerInstance("helm_copy", h.controller, h.id, {}, h.gadget_index))
    state.combat = {"attackers": [], "blockers": [], "declared": False, "blocks_declared": False,
                    "pumped": False}


def _end_step(state):
    _fire_delayed(state, "next_end_step")


def _cleanup_step(state):
    for p in state.battlefield.values():
        if p.ueot != [0, 0]:
            p.ueot = [0, 0]
        p.damage = 0


def _fire_delayed(state, when):
    keep = []
    for d in state.delayed:
        if d["when"] == when:
            state.pending_triggers.append(TriggerInstance(d["kind"], d["controller"], d.get("source"),
                                                          d.get("data", {}), d.get("gadget_index", 0)))
        else:
            keep.append(d)
    state.delayed = keep


def _combat_damage(state):
    from .cards import definition
    defender = other(state.active_player)
    lifelink_gain = {}
    for aid in state.combat.get("attackers", []):
        a = state.live.get(aid)
        if a is None:
            continue
        power = max(0, effective_stats(state, a)[0])
        if power == 0:
            continue
        blocked_by = [b for b, att in state.combat.get("blockers", []) if att == aid and b in state.live]
        if blocked_by:
            for b in blocked_by:
                state.live[b].damage += power
        elif "infect" in definition(a.name).keywords:
            state.players[defender].poison += power
        else:
            lose_life(state, defender, power)
        state.emit("combat_damage", source=aid, amount=power, to="blockers" if blocked_by else "player")
        if "lifelink" in definition(a.name).keywords:
            lifelink_gain[a.controller] = lifelink_gain.get(a.controller, 0) + power
    for player, amount in sorted(lifelink_gain.items()):
        gain_life(state, player, amount)


_STEP_ACTIONS = {
    "untap": _untap_step,
    "upkeep": _upkeep_step,
    "draw": _draw_step,
    "begin_combat": _begin_combat,
    "combat_damage": _combat_damage,
    "end": _end_step,
    "cleanup": _cleanup_step,
}


def step_done(state):
    return (not state.stack and state.priority is None and not state.pending_triggers
            and state.pending_choice is None and not needs_combat_declaration(state))


def _advance_inplace(state):
    if state.stack:
        raise RulesError("cannot advance with a nonempty stack")
    i = STEPS.index(state.phase_step)
    if state.phase_step == "declare_attackers" and not state.combat.get("attackers"):
        i = STEPS.index("end_combat") - 1
    if i + 1 == len(STEPS):
        _begin_turn(state)
        nxt = "untap"
    else:
        nxt = STEPS[i + 1]
    state.phase_step = nxt
    state.emit("step", step=nxt)
    act = _STEP_ACTIONS.get(nxt)
    if act:
        act(state)
    settle(state)
    state.priority = None if nxt in NO_PRIORITY else state.active_player
    state.passes = 0
    return state


def advance_step(state):
    if state.stack:
        raise RulesError("cannot advance with a nonempty stack")
    return _advance_inplace(state.copy())


# ------------------------------------------------------------ decisions

def decider_for(state, player):
    """Who makes ``player``'s decisions right now (control of a turn)."""
    if player == state.active_player:
        return state.turn_controller
    return player


def needs_combat_declaration(state):
    if state.phase_step == "declare_attackers" and not state.combat.get("declared", True):
        return True
    if state.phase_step == "declare_blockers" and not state.combat.get("blocks_declared", True):
        return True
    return False


def pending_decision(state):
    if state.game_over:
        return None
    if state.pending_choice is not None:
        p = state.pending_choice["player"]
        return Decision(p, decider_for(state, p), state.pending_choice["kind"])
    if state.phase_step == "declare_attackers" and not state.combat.get("declared", True):
        ap = state.active_player
        return Decision(ap, decider_for(state, ap), "attackers")
    if state.phase_step == "declare_blockers" and not state.combat.get("blocks_declared", True):
        dp = other(state.active_player)
        return Decision(dp, decider_for(state, dp), "blockers")
    if state.priority is not None:
        p = state.priority
        return Decision(p, decider_for(state, p), "priority")
    return None


def can_attack(state, p):
    if not p.is_creature() or p.tapped or p.controller != state.active_player:
        return False
    if p.sick and not has_keyword(state, p, "haste"):
        return False
    if state.by_name.get("Moat") and not has_keyword(state, p, "flying"):
        return False
    if state.by_name.get("Blazing Archon") and any(
            a.controller != p.controller for a in state.named("Blazing Archon")):
        return False
    return True


def _attack_options(state):
    from itertools import combinations
    able = [p.id for pid, p in sorted(state.live.items()) if can_attack(state, p)]
    forced = [pid for pid in able if any(h.controller == state.active_player
                                         for h in state.named("Hellraiser Goblin"))]
    if forced and len(forced) == len(able):
        return [tuple(able)]
    opts = []
    for r in range(len(able) + 1):
        opts.extend(combinations(able, r))
    return opts


def _block_options(state):
    from itertools import product
    dp = other(state.active_player)
    attackers = [a for a in state.combat.get("attackers", []) if a in state.live]
    blockable = [a for a in attackers if not has_keyword(state, state.live[a], "unblockable")]
    blockers = [p.id for pid, p in sorted(state.live.items())
                if p.controller == dp and p.is_creature() and not p.tapped]
    if not blockable or not blockers:
        return [()]
    opts = []
    for combo in product([None, *blockable], repeat=len(blockers)):
        opts.append(tuple((b, a) for b, a in zip(blockers, combo) if a is not None))
    return opts


def legal_actions(state, decider=None):
    dec = pending_decision(state)
    if dec is None:
        return []
    if decider is not None and decider != dec.decider:
        return []
    p, d = dec.player, dec.decider
    if dec.kind == "attackers":
        return [Action("declare_attackers", p, d, attackers=opt) for opt in _attack_options(state)]
    if dec.kind == "blockers":
        return [Action("declare_blockers", p, d, blockers=opt) for opt in _block_options(state)]
    if dec.kind == "choice":
        return [Action(**a, player=p, decider=d) for a in state.pending_choice["options"]]
    if dec.kind == "target":
        return [Action("choose_target", p, d, card=state.pending_choice["card"], targets=(t,))
                for t in state.pending_choice["targets"]]
    return _scripts().priority_actions(state, p, d)


def _apply_inplace(state, action):
    scripts = _scripts()
    if action.kind == "declare_attackers":
        state.combat["attackers"] = list(action.attackers)
        state.combat["declared"] = True
        for a in action.attackers:
            state.battlefield[a].tapped = True
        state.emit("attack", attackers=list(action.attackers))
        settle(state)
        state.priority = state.active_player
        state.passes = 0
        return state
    if action.kind == "declare_blockers":
        state.combat["blockers"] = [list(b) for b in action.blockers]
        state.combat["blocks_declared"] = True
        settle(state)
        state.priority = state.active_player
        state.passes = 0
        return state
    if state.pending_choice is not None:
        scripts.apply_choice(state, action)
        settle(state)
        return state
    if action.kind == "pass_priority":
        state.passes += 1
        if state.passes >= 2:
            state.passes = 0
            if state.stack:
                _resolve_top_inplace(state)
                state.priority = None if state.game_over else state.active_player
            else:
                state.priority = None
        else:
            state.priority = other(state.priority)
        return state
    scripts.apply_priority_action(state, action)
    settle(state)
    state.passes = 0
    state.priority = action.player
    return state


def apply_action(state, action):
    return _apply_inplace(state.copy(), action)


# ---------------------------------------------------------- text edits

def apply_text_edit(p, e):
    q = p.copy()
    q.text_edits.append(e)
    return q


def _apply_text_edit_inplace(p, e):
    p.text_edits.append(e)
    return p


# -------------------------------------------------------------- driver

class StepBudgetExceeded(RulesError):
    pass


def drive(state, choose, stop=None, max_steps=100000, on_decision=None):
    """Advance ``state`` in place until ``stop(state)``, game over or the budget.

    ``choose(state, decision, actions)`` picks an action whenever a decision
    is pending.  Returns the number of decisions taken.
    """
    taken = 0
    budget = max_steps
    while not state.game_over:
        if stop is not None and stop(state):
            return taken
        budget -= 1
        if budget < 0:
            raise StepBudgetExceeded(f"step budget {max_steps} exhausted on turn {state.turn_number}")
        dec = pending_decision(state)
        if dec is None:
            _advance_inplace(state)
            continue
        acts = legal_actions(state)
        if on_decision is not None:
            on_decision(state, dec, acts)
        action = choose(state, dec, acts)
        _apply_inplace(state, action)
        taken += 1
    return taken


COMBAT_STEPS = ("begin_combat", "declare_attackers", "declare_blockers", "combat_damage", "end_combat")


def resolve_combat(state, pump_count):
    """Play the rest of the current combat, answering the pump with ``pump_count``.

    Every other combat decision must be forced.  Returns the state with the
    end-of-combat step finished.
    """
    if state.phase_step not in COMBAT_STEPS:
        raise RulesError(f"resolve_combat called during {state.phase_step}, outside the combat phase")
    if pump_count < 0:
        raise ValueError("pump count must be a natural number")
    s = state.copy()

    def choose(st, dec, acts):
        pumps = [a for a in acts if a.kind == "choose_integer"]
        if pumps:
            return choose_integer(pumps[0].player, pumps[0].decider, pump_count)
        if len(acts) != 1:
            raise RulesError(f"unforced combat decision: {[a.to_dict() for a in acts]}")
        return acts[0]

    def done(st):
        return st.phase_step not in COMBAT_STEPS or (st.phase_step == "end_combat" and step_done(st))

    drive(s, choose, stop=done)
    return s
