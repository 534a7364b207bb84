"""Card library: one data file per card plus the scripts that give them behaviour.

Definitions live in ``data/*.json``.  The deck list in ``decklist.json`` keeps
the raw spellings exactly as printed; lookups go through a normalization map so
"Priviledged Position" and "Privileged Position" resolve to the same card.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .. import engine as E


@dataclass(frozen=True)
class AbilityScript:
    id: str
    kind: str
    scripted: bool


@dataclass(frozen=True)
class CardDefinition:
    name: str
    types: tuple
    supertypes: tuple
    creature_types: tuple
    colors: tuple
    power: int | None
    toughness: int | None
    keywords: tuple
    text: str
    abilities: tuple
    deck_name: str | None
    deck_count: int
    deck_column: int | None
    group: str
    supplemental: bool
    legacy_legal: bool
    notes: str = ""

    @property
    def is_creature(self):
        return "creature" in self.types


@dataclass
class DeckList:
    entries: list = field(default_factory=list)

    @property
    def total(self):
        return sum(c for _, c in self.entries)

    def count(self, name):
        name = normalize(name)
        return sum(c for n, c in self.entries if normalize(n) == name)

    def __contains__(self, item):
        return item in self.entries


TOKEN_SUFFIX = " Token"


def _package_files():
    return resources.files(__package__)


@lru_cache(maxsize=1)
def _decklist_data():
    return json.loads((_package_files() / "decklist.json").read_text())


@lru_cache(maxsize=1)
def library():
    """All card definitions keyed by normalized name."""
    out = {}
    for entry in sorted((_package_files() / "data").iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".json"):
            continue
        d = json.loads(entry.read_text())
        cd = CardDefinition(
            name=d["name"], types=tuple(d["types"]), supertypes=tuple(d["supertypes"]),
            creature_types=tuple(d["creature_types"]), colors=tuple(d["colors"]),
            power=d["power"], toughness=d["toughness"], keywords=tuple(d["keywords"]), text=d["text"],
            abilities=tuple(AbilityScript(a["id"], a["kind"], a["scripted"]) for a in d["abilities"]),
            deck_name=d["deck_name"], deck_count=d["deck_count"], deck_column=d["deck_column"],
            group=d["group"], supplemental=d["supplemental"], legacy_legal=d["legacy_legal"], notes=d["notes"],
        )
        if cd.name in out:
            raise ValueError(f"duplicate definition for {cd.name}")
        out[cd.name] = cd
    return out


def normalization_map():
    return dict(_decklist_data()["normalization"])


def normalize(name):
    return _decklist_data()["normalization"].get(name, name)


_TOKEN_DEF = CardDefinition(
    name="token", types=("creature",), supertypes=(), creature_types=(), colors=(), power=None,
    toughness=None, keywords=(), text="", abilities=(), deck_name=None, deck_count=0,
    deck_column=None, group="token", supplemental=False, legacy_legal=True,
)


def is_known(name):
    return normalize(name) in library() or name.endswith(TOKEN_SUFFIX)


def definition(name):
    lib = library()
    key = normalize(name)
    if key in lib:
        return lib[key]
    if name.endswith(TOKEN_SUFFIX):
        return _TOKEN_DEF
    raise KeyError(f"no card definition for {name!r}")


def instantiate_deck():
    """The deck list exactly as printed, raw spellings and all."""
    entries = []
    for col in _decklist_data()["columns"]:
        for count, raw in col["entries"]:
            definition(raw)
            entries.append((raw, count))
    return DeckList(entries)


def supplements():
    return sorted(n for n, d in library().items() if d.supplemental)


# --------------------------------------------------------- watcher logic

def _watcher_token(w):
    word_type = E.edited_word(w, "Zombie")
    word_color = E.edited_word(w, "black")
    return E.TokenSpec(f"{word_type}{TOKEN_SUFFIX}", 2, 2, [word_type], [word_color])


def _watcher_sees(state, w, dead):
    types = set(dead.extra.get("lki_types") or E.creature_types(dead))
    if w.name == "Rotlung Reanimator":
        return dead.id == w.id or E.edited_word(w, "Cleric") in types
    if w.name == "Xathrid Necromancer":
        human = E.edited_word(w, "Human")
        return dead.controller == w.controller and (dead.id == w.id or human in types)
    return False


def _watchers(state):
    return state.named("Rotlung Reanimator") + state.named("Xathrid Necromancer")


def death_trigger_tokens(state, dead):
    """Token specs the live watchers would create for one death."""
    specs = []
    for w in _watchers(state):
        if _watcher_sees(state, w, dead):
            spec = _watcher_token(w)
            if w.name == "Xathrid Necromancer":
                spec.tapped = True
            specs.append(spec)
    return specs


def death_triggers(state, ev):
    dead = ev.permanent
    out = []
    # a watcher that died itself is no longer live; it still sees its own death
    watchers = _watchers(state)
    if dead.name in ("Rotlung Reanimator", "Xathrid Necromancer") and not dead.phased_out:
        watchers = watchers + [dead]
    for w in watchers:
        if _watcher_sees(state, w, dead):
            spec = _watcher_token(w)
            out.append(E.TriggerInstance(
                "watcher", w.controller, w.id,
                {"token": [spec.name, spec.creature_types, spec.colors, w.name == "Xathrid Necromancer"],
                 "gadget": dict(w.gadget)},
                w.gadget_index))
    if not dead.is_token:
        for g in state.named("Grave Betrayal"):
            if dead.controller != g.controller:
                out.append(E.TriggerInstance(
                    "grave_betrayal", g.controller, g.id, {"card": dead.name, "owner": dead.owner},
                    g.gadget_index))
    return out


# ------------------------------------------------------- counter/control ops

def clockspinning_adjust(state, target, add, kind=None):
    """Add or remove one counter.  ``target`` is a permanent id or an ExiledCard."""
    s = state.copy()
    if isinstance(target, E.ExiledCard):
        idx = state.exile_zone.index(target)
        card = s.exile_zone[idx]
        if card.time_counters <= 0:
            raise E.RulesError(f"{card.card} has no counters to choose")
        card.time_counters += 1 if add else -1
        if card.time_counters == 0 and card.suspended:
            s.exile_zone.remove(card)
            from .scripts import cast_from_exile
            cast_from_exile(s, card)
            E.settle(s)
        return s
    p = s.battlefield[target]
    present = [k for k, v in sorted(p.counters.items()) if v > 0]
    if not present:
        raise E.RulesError(f"{p.name} has no counters to choose")
    if kind is None:
        if len(present) > 1:
            raise E.RulesError(f"{p.name} carries several counter kinds; name one of {present}")
        kind = present[0]
    if kind not in present:
        raise E.RulesError(f"{p.name} has no {kind} counter")
    E.add_counters(s, p, kind, 1 if add else -1)
    E.settle(s)
    return s


def cruel_entertainment_swap(state, first=E.ALICE, second=E.BOB):
    if first == second:
        raise E.RulesError("Cruel Entertainment needs two different players")
    s = state.copy()
    from .scripts import _swap
    _swap(s, first, second)
    return s


def cleanup_chain_effects(state, pump=0, max_steps=20000):
    """Play forward through the activation chain and stop at the first cycle boundary.

    The only choices tolerated on the way are the input pump (answered with
    ``pump``) and the Panoptic Mirror option (answered "cast").  Anything else
    with more than one option raises ``ForcednessError``.
    """
    from .scripts import activation_complete
    s = state.copy()

    def choose(st, dec, acts):
        if len(acts) == 1:
            return acts[0]
        pumps = [a for a in acts if a.kind == "choose_integer"]
        if pumps:
            return E.choose_integer(pumps[0].player, pumps[0].decider, pump)
        if dec.kind == "choice":
            return acts[0]
        raise ForcednessError(f"unforced branch during cleanup: {[a.to_dict() for a in acts]}")

    E.drive(s, choose, stop=activation_complete, max_steps=max_steps)
    return s


class ForcednessError(E.RulesError):
    pass
