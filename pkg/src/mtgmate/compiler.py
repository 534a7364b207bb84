"""Turn Turing machines and prenex sentences into game boards, and read them back.

Tape encoding
-------------
Every tape cell that is not a far-off blank is a token creature.  Its creature
type is the symbol (``symbol_tags``), its color says which side of the head it
is on (white left, green right) and its +1/+1 counters give the distance from
the head: a 2/2 token with ``d + 1`` counters sits ``d`` cells away once the
global -1/-1 field is applied, so effective toughness minus two is the
distance.  The head cell is the token at distance zero.

State and transitions
---------------------
There is one bank of watchers (Rotlung Reanimator token copies) per machine
state, one watcher per (state, symbol).  Only the current state's bank is
phased in.  Infest shrinks every creature by two, so the head cell and only
the head cell dies, and exactly one watcher sees it.  Its edited text writes
the new symbol; the rest of the transition (the shift of every tape cell at
the next upkeep and the bank swap through phasing) is carried in the watcher's
``gadget`` record and flagged as reconstructed in the notes.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, asdict

from . import engine as E
from . import tm as T
from .cards import TOKEN_SUFFIX, definition, instantiate_deck, is_known, normalize
from .cards.scripts import is_tape_cell, position_of

ASSEMBLY = "Assembly-Worker"
DIVIDER_TAG = "Elemental"
RESERVED_TYPES = frozenset({
    "Human", "Zombie", "Cleric", "Wall", "Elemental", "Dinosaur", "Imp", "Goblin", "Berserker", "Elf",
    "Wizard", "Spellshaper", "Sliver", "Assembly-Worker", "Vampire", "Golem", "Eldrazi", "Drone",
    "Insect", "Incarnation", "Archon",
})
TAG_POOL = (
    "Aetherborn", "Angel", "Ape", "Archer", "Assassin", "Avatar", "Bat", "Bear", "Bird", "Boar",
    "Cat", "Centaur", "Construct", "Crab", "Demon", "Devil", "Djinn", "Dragon", "Drake", "Dryad",
    "Dwarf", "Efreet", "Faerie", "Fish", "Fox", "Frog", "Fungus", "Giant", "Gnome", "Gorgon",
    "Griffin", "Hound", "Horror", "Hydra", "Kavu", "Kithkin", "Kor", "Kraken", "Leviathan", "Lizard",
    "Minotaur", "Monk", "Mutant", "Naga", "Nightmare", "Ogre", "Ooze", "Orc", "Pegasus", "Phoenix",
    "Rat", "Rhino", "Rogue", "Salamander", "Satyr", "Scarecrow", "Serpent", "Shade", "Shapeshifter",
    "Skeleton", "Snake", "Soldier", "Specter", "Sphinx", "Spider", "Spirit", "Squirrel", "Thopter",
    "Treefolk", "Troll", "Unicorn", "Warrior", "Wolf", "Wurm", "Yeti",
)
assert not RESERVED_TYPES & set(TAG_POOL)

PROTECTION_COUNTERS = 3
DEFAULT_LIFE_BUFFER = 10 ** 6


class CapacityError(ValueError):
    pass


class DecodeError(ValueError):
    pass


class AuditError(ValueError):
    pass


# ---------------------------------------------------------------- plans

@dataclass
class GadgetPlan:
    n: int
    quantifiers: list = field(default_factory=list)
    swap_schedule: list = field(default_factory=list)
    countdown: dict = field(default_factory=dict)
    tick_owner: dict = field(default_factory=dict)
    activation_round: int = 1

    @classmethod
    def for_sentence(cls, sentence):
        n = sentence.n
        schedule = []
        for r, q in enumerate(sentence.quantifiers, start=1):
            if q == "E":
                schedule.append({"round": r, "quantifier": "E", "alice_turn": E.ALICE, "bob_turn": E.BOB})
            else:
                schedule.append({"round": r, "quantifier": "A", "alice_turn": E.BOB, "bob_turn": E.ALICE})
        countdown = {} if n == 0 else {
            "Human Frailty": n, "Choke": n, "Infernal Reckoning": n, "Reality Acid": n,
        }
        ticks = {} if n == 0 else {
            "Human Frailty": "Alice's upkeep (suspend, owner Alice)",
            "Choke": "Alice's upkeep (suspend, owner Alice)",
            "Infernal Reckoning": "Bob's upkeep (suspend, owner Bob)",
            "Reality Acid": "Bob's upkeep (vanishing, controller Bob)",
        }
        return cls(n, list(sentence.quantifiers), schedule, countdown, ticks, n + 1)

    def to_dict(self):
        return asdict(self)


@dataclass
class BoardLayout:
    tape_permanents: dict = field(default_factory=dict)
    machine_permanents: list = field(default_factory=list)
    gadget_permanents: list = field(default_factory=list)
    exile_schedule: list = field(default_factory=list)

    def to_dict(self):
        return {"tape_permanents": {str(k): v for k, v in sorted(self.tape_permanents.items())},
                "machine_permanents": self.machine_permanents,
                "gadget_permanents": self.gadget_permanents,
                "exile_schedule": self.exile_schedule}


@dataclass
class CompilationReport:
    kind: str
    permanent_counts: dict = field(default_factory=dict)
    total_permanents: int = 0
    watcher_count: int = 0
    tape_length: int = 0
    alphabet_size: int = 0
    state_count: int = 0
    countdown: dict = field(default_factory=dict)
    swap_schedule: list = field(default_factory=list)
    card_usage: dict = field(default_factory=dict)
    foreign_cards: list = field(default_factory=list)
    problems: list = field(default_factory=list)
    passed: bool = True

    def to_dict(self):
        return asdict(self)


# ------------------------------------------------------------ machine

def symbol_tags(tm):
    """Map each tape symbol to a creature type; the divider becomes Elemental."""
    plain = [s for s in tm.alphabet if s != tm.divider]
    if len(plain) > len(TAG_POOL):
        raise CapacityError(
            f"{tm.name or 'machine'} needs {len(plain)} symbol types but only {len(TAG_POOL)} creature "
            f"types are free (|alphabet| x |states| = {len(tm.alphabet) * len(tm.states)} watchers)")
    tags = dict(zip(plain, TAG_POOL))
    if tm.divider in tm.alphabet:
        tags[tm.divider] = DIVIDER_TAG
    return tags


def _tape_token(state, tag, distance, side, controller):
    color = "white" if side < 0 else "green"
    tok = E.create_token(state, E.TokenSpec(f"{tag}{TOKEN_SUFFIX}", 2, 2, [tag], [color]), controller)
    tok.sick = False
    E.add_counters(state, tok, E.PLUS, distance + 1)
    return tok


def _machine_board(tm, cfg, life):
    tags = symbol_tags(tm)
    state = E.new_game()
    for pl in state.players:
        pl.life = life
    alice = state.players[E.ALICE]
    alice.library = ["Infest"]
    alice.hand = ["Coalition Victory"]
    layout = BoardLayout()

    def place(card, controller=E.ALICE, owner=None, bucket=None, **kw):
        p = E.create_permanent(state, card, controller, owner, **kw)
        (bucket if bucket is not None else layout.machine_permanents).append(
            {"id": p.id, "card": p.name, "controller": controller})
        return p

    place("Night of Souls' Betrayal")
    wheel = place("Wheel of Sun and Moon")
    wheel.extra["enchanted_player"] = E.ALICE
    place("Prismatic Omen")
    place("Ancient Tomb")
    place("Moat")

    banks = {}
    index = 0
    for q in tm.states:
        ids = []
        for s in tm.alphabet:
            index += 1
            t = tm.transitions.get((q, s))
            edits = [E.TextEdit("replace_creature_type", "Cleric", tags[s])]
            if t is None:
                gadget = {"role": "watcher", "state": q, "symbol": s, "halt": True, "index": index}
                edits.append(E.TextEdit("replace_creature_type", "Zombie", tags[s]))
            else:
                q2, s2, d = t
                gadget = {"role": "watcher", "state": q, "symbol": s, "next": q2, "write": s2, "move": d,
                          "index": index}
                edits.append(E.TextEdit("replace_creature_type", "Zombie", tags[s2]))
                edits.append(E.TextEdit("replace_color_word", "black", "white" if d == T.RIGHT else "green"))
            edits.append(E.TextEdit("add_creature_type", "Vampire", ASSEMBLY))
            w = E.Permanent(0, "Rotlung Reanimator", E.ALICE, E.ALICE, ["creature"], ["Zombie", "Cleric"],
                            ["black"], 2, 2, {E.PLUS: PROTECTION_COUNTERS}, True)
            w.text_edits = edits
            w.gadget = gadget
            w.gadget_index = index
            w.phased_out = q != cfg.state
            E._put_onto_battlefield(state, w)
            ids.append(w.id)
        banks[q] = ids
        layout.machine_permanents.append({"bank": q, "ids": ids})

    cells = {i: s for i, s in cfg.tape.items() if s != tm.blank}
    for i in range(cfg.head + 1):
        cells.setdefault(i, tm.blank)
    for i in sorted(cells):
        side = -1 if i < cfg.head else 1
        tok = _tape_token(state, tags[cells[i]], abs(i - cfg.head), side, E.ALICE)
        layout.tape_permanents[i] = {"id": tok.id, "symbol": cells[i], "type": tags[cells[i]],
                                     "color": "white" if side < 0 else "green",
                                     "counters": abs(i - cfg.head) + 1}
    state.meta.update({
        "kind": "machine",
        "machine_name": tm.name,
        "banks": banks,
        "symbol_tags": tags,
        "tag_symbols": {v: k for k, v in tags.items()},
        "blank": tm.blank,
        "initial_state": tm.initial_state,
        "tape_controller": E.ALICE,
        "machine_steps": cfg.steps_taken,
        "count_state": None,
        "count_entries": 0,
        "n": None,
        "layout": layout.to_dict(),
        "states": list(tm.states),
        "alphabet": list(tm.alphabet),
    })
    return state, layout


def compile_machine(tm, cfg=None, life=20):
    """Zero-player board whose forced play runs ``tm`` from ``cfg``."""
    cfg = cfg or T.initial_config(tm)
    if cfg.head < 0:
        raise ValueError("head must be non-negative")
    state, _ = _machine_board(tm, cfg, life)
    state.reindex()
    return state


# ---------------------------------------------------------- mate in n

def compile_mate_in_n(sentence, life=DEFAULT_LIFE_BUFFER):
    """Board for the mate-in-n question of ``sentence``.

    The search machine sits dormant until round n+1; rounds 1..n each feed one
    input through the write gadget.
    """
    if isinstance(sentence, str):
        sentence = T.parse_sentence(sentence)
    tm = T.build_search_machine(sentence)
    n = sentence.n
    plan = GadgetPlan.for_sentence(sentence)
    if n == 0:
        cfg = T.search_initial_config(tm, [])
        state, layout = _machine_board(tm, cfg, life)
    else:
        cfg = T.MachineConfig({0: T.START}, 0, tm.initial_state, 0)
        state, layout = _machine_board(tm, cfg, life)
        _add_gadgets(state, layout, sentence, tm, n)
    state.meta.update({
        "kind": "mate",
        "n": n,
        "sentence": sentence.to_dict(),
        "plan": plan.to_dict(),
        "count_state": T.NEXT_X,
        "layout": layout.to_dict(),
    })
    state.reindex()
    return state


def _add_gadgets(state, layout, sentence, tm, n):
    A, B = E.ALICE, E.BOB
    gi = [10 ** 6]

    def nxt():
        gi[0] += 1
        return gi[0]

    def card(name, controller, owner=None, **kw):
        p = E.create_permanent(state, name, controller, owner)
        p.gadget_index = nxt()
        p.sick = False
        for k, v in kw.items():
            setattr(p, k, v)
        layout.gadget_permanents.append({"id": p.id, "card": p.name, "controller": controller,
                                         "token": False})
        return p

    def token(name, controller, prey=True, counters=None, card_types=None, edits=(), pt=None):
        d = definition(name)
        p = E.Permanent(0, name, controller, controller, list(card_types or d.types), list(d.creature_types),
                        list(d.colors), pt[0] if pt else d.power, pt[1] if pt else d.toughness,
                        dict(counters or {}), True)
        if prey:
            p.counters[E.PREY] = 1
        p.text_edits = list(edits)
        p.gadget_index = nxt()
        E._put_onto_battlefield(state, p)
        layout.gadget_permanents.append({"id": p.id, "card": name, "controller": controller, "token": True,
                                         "prey": prey})
        return p

    def attach(aura, host):
        aura.attached_to = host.id
        host.attachments.append(aura.id)

    # countdown: the machine bank for the initial state sleeps until round n+1
    for q, ids in state.meta["banks"].items():
        for wid in ids:
            w = state.battlefield[wid]
            w.phased_out = True
            if q == tm.initial_state:
                w.phasing = "curse"
                w.phased_out = n % 2 == 1

    # cleanup chain
    card("Tetzimoc, Primal Death", A, owner=B,
         text_edits=[E.TextEdit("add_creature_type", "Vampire", "Human")])
    gb = card("Grave Betrayal", B)
    acid = card("Reality Acid", B)
    acid.extra["vanishing"] = True
    acid.counters[E.TIME] = n
    attach(acid, gb)
    ghost = token("Ghostflame Sliver", A, prey=False,
                  edits=[E.TextEdit("replace_creature_type", "Sliver", "Dinosaur")])
    card("Privileged Position", A)
    state.exile_zone.append(E.ExiledCard("Human Frailty", A, n, True))
    state.exile_zone.append(E.ExiledCard("Choke", A, n, True))
    state.exile_zone.append(E.ExiledCard("Infernal Reckoning", B, n, True))

    # draw lock
    token("Maralen of the Mornsong", A)
    card("Timelock Orb", A)

    # write gadget
    entity = token("Ageless Entity", A)
    helm = card("Helm of the Host", A)
    attach(helm, entity)
    needle = card("Pithing Needle", A)
    needle.extra["named"] = "Helm of the Host"
    imp = token("Daggerdrome Imp", A, counters={E.PLUS: 1})
    attach(token("Shade's Form", A, prey=False), imp)
    attach(token("Cloak of Mists", A, prey=False), imp)
    token("Hellraiser Goblin", A)
    magus = token("Magus of the Coffers", A, edits=[E.TextEdit("replace_creature_type", "Human", "Spellshaper")])
    attach(card("Umbral Mantle", A), magus)
    for _ in range(6):
        token("Ancient Tomb", A, card_types=["land", "creature"], pt=(2, 2))

    # control swap
    mirror = card("Panoptic Mirror", B, phasing="curse", phased_out=True)
    mirror.extra["imprint"] = "Cruel Entertainment"
    curse = card("Teferi's Curse", B, phased_out=True)
    attach(curse, mirror)
    state.exile_zone.append(E.ExiledCard("Cruel Entertainment", B, 0, False, imprinted_on=mirror.id))

    layout.exile_schedule = [[c.card, c.time_counters] for c in state.exile_zone if c.suspended]
    state.meta["residue"] = {"mirror": [mirror.id, curse.id]}
    del ghost


# ---------------------------------------------------------------- decode

def at_cycle_boundary(state):
    return state.game_over or (state.active_player == E.ALICE and state.phase_step == "untap"
                               and not state.stack and not state.pending_triggers)


def decode_board_tape(state, check_boundary=True):
    """Read the MachineConfig the board encodes."""
    if check_boundary and not at_cycle_boundary(state):
        raise DecodeError(f"mid-cycle: turn {state.turn_number} step {state.phase_step}; "
                          "decoding is defined only at cycle boundaries")
    meta = state.meta
    if "tag_symbols" not in meta:
        raise DecodeError("board carries no tape bank")
    tag_symbols = meta["tag_symbols"]
    whites, greens, heads = [], [], []
    for pid in sorted(state.live):
        p = state.live[pid]
        if not is_tape_cell(state, p):
            continue
        syms = [tag_symbols[t] for t in sorted(E.creature_types(p)) if t in tag_symbols]
        if len(syms) != 1:
            raise DecodeError(f"tape token {pid} carries {len(syms)} symbol types")
        d = position_of(state, p)
        cs = E.colors(state, p)
        if d < 0:
            raise DecodeError(f"tape token {pid} has negative distance {d}")
        if d == 0:
            heads.append(syms[0])
        elif "white" in cs and "green" not in cs:
            whites.append((d, syms[0], pid))
        elif "green" in cs and "white" not in cs:
            greens.append((d, syms[0], pid))
        else:
            raise DecodeError(f"tape token {pid} has no side color: {sorted(cs)}")
    if len(heads) != 1:
        raise DecodeError(f"expected one head cell, found {len(heads)}")
    head = max((d for d, _, _ in whites), default=0)
    tape = {head: heads[0]}
    for d, s, pid in whites:
        if head - d in tape:
            raise DecodeError(f"two tokens claim cell {head - d}")
        tape[head - d] = s
    for d, s, pid in greens:
        if head + d in tape:
            raise DecodeError(f"two tokens claim cell {head + d}")
        tape[head + d] = s
    blank = meta["blank"]
    tape = {i: s for i, s in tape.items() if s != blank}
    return T.MachineConfig(tape, head, current_bank(state), meta.get("machine_steps", 0))


def current_bank(state):
    live_states = sorted({p.gadget["state"] for p in state.named("Rotlung Reanimator")
                          if p.gadget.get("role") == "watcher"})
    if len(live_states) == 1:
        return live_states[0]
    if len(live_states) > 1:
        raise DecodeError(f"several banks phased in: {live_states}")
    dormant = set()
    for q, ids in state.meta["banks"].items():
        if any(state.battlefield[w].phasing == "curse" for w in ids if w in state.battlefield):
            dormant.add(q)
    if len(dormant) == 1:
        return dormant.pop()
    raise DecodeError(f"unrecognizable bank: no watcher phased in and {len(dormant)} dormant banks")


# ------------------------------------------------------------------ audit

MIRROR_RESIDUE = frozenset({"Panoptic Mirror", "Teferi's Curse"})
INERT_RESIDUE = frozenset({"Helm of the Host", "Umbral Mantle", "Pithing Needle", "Timelock Orb",
                           "Privileged Position", "Choke"})
MACHINE_CARDS = frozenset({"Night of Souls' Betrayal", "Wheel of Sun and Moon", "Prismatic Omen", "Ancient Tomb",
                           "Moat", "Rotlung Reanimator"})


def classify(state, p):
    """machine | tape | mirror residue | inert residue | gadget."""
    if p.name in MACHINE_CARDS and not p.count(E.PREY):
        return "machine"
    if is_tape_cell(state, p):
        return "tape"
    if p.name in MIRROR_RESIDUE:
        return "mirror residue"
    if p.name in INERT_RESIDUE and p.attached_to is None:
        return "inert residue"
    return "gadget"


def build_report(state):
    meta = state.meta
    counts = Counter(p.name for p in state.battlefield.values())
    usage = Counter(normalize(p.name) for p in state.battlefield.values() if not p.name.endswith(TOKEN_SUFFIX))
    for c in state.exile_zone:
        usage[normalize(c.card)] += 1
    for pl in state.players:
        for zone in (pl.hand, pl.library, pl.graveyard):
            for c in zone:
                usage[normalize(c)] += 1
    plan = meta.get("plan") or {}
    watchers = sum(1 for p in state.battlefield.values() if p.gadget.get("role") == "watcher")
    tape = [p for p in state.battlefield.values() if is_tape_cell(state, p)]
    return CompilationReport(
        kind=meta.get("kind", "unknown"),
        permanent_counts=dict(sorted(counts.items())),
        total_permanents=len(state.battlefield),
        watcher_count=watchers,
        tape_length=len(tape),
        alphabet_size=len(meta.get("alphabet", ())),
        state_count=len(meta.get("states", ())),
        countdown=dict(plan.get("countdown", {})),
        swap_schedule=list(plan.get("swap_schedule", [])),
        card_usage=dict(sorted(usage.items())),
    )


def audit(state, report=None):
    """Check a compiled board against its report and the card library."""
    report = report or build_report(state)
    fresh = build_report(state)
    problems = []
    foreign = sorted({p.name for p in state.battlefield.values() if not is_known(p.name)}
                     | {c.card for c in state.exile_zone if not is_known(c.card)}
                     | {c for pl in state.players for z in (pl.hand, pl.library, pl.graveyard)
                        for c in z if not is_known(c)})
    for name in foreign:
        problems.append(f"foreign card: {name}")
    deck = instantiate_deck()
    deck_names = {normalize(n) for n, _ in deck.entries}
    for name in sorted(fresh.card_usage):
        if name in foreign:
            continue
        d = definition(name)
        if normalize(name) not in deck_names and not d.supplemental:
            problems.append(f"card outside the deck and supplements: {name}")
    if fresh.permanent_counts != report.permanent_counts:
        problems.append("permanent counts differ from the report")
    n = state.meta.get("n")
    if n:
        plan_cd = state.meta["plan"]["countdown"]
        found = {c.card: c.time_counters for c in state.exile_zone if c.suspended}
        for p in state.battlefield.values():
            if "vanishing" in p.extra:
                found[p.name] = p.count(E.TIME)
        for card_name, want in plan_cd.items():
            if found.get(card_name) != want:
                problems.append(f"countdown of {card_name} is {found.get(card_name)}, plan says {want}")
        for p in state.battlefield.values():
            if p.is_creature() and p.is_token and not p.count(E.PREY) and classify(state, p) == "gadget" \
                    and p.name not in ("Ghostflame Sliver",):
                problems.append(f"gadget token {p.name} ({p.id}) lacks a prey counter")
    report.foreign_cards = foreign
    report.problems = problems
    report.passed = not problems
    if problems:
        raise AuditError("; ".join(problems))
    return report


def cleanup_audit(state):
    """Post-activation battlefield census: what survived, by category."""
    census = {"machine": 0, "tape": 0, "mirror residue": 0, "inert residue": 0, "gadget": []}
    for pid in sorted(state.battlefield):
        p = state.battlefield[pid]
        c = classify(state, p)
        if c == "gadget":
            census["gadget"].append(f"{p.name}#{p.id}")
        else:
            census[c] += 1
    prey = [p.id for p in state.battlefield.values() if p.count(E.PREY)]
    tokens_in_gy = [c for pl in state.players for c in pl.graveyard if c.endswith(TOKEN_SUFFIX)]
    census["prey_survivors"] = prey
    census["tokens_in_graveyards"] = tokens_in_gy
    census["clean"] = not census["gadget"] and not prey and not tokens_in_gy
    return census


def save_state(state, path):
    with open(path, "w") as fh:
        fh.write(state.to_json(indent=1))
        fh.write("\n")


def load_state(path):
    with open(path) as fh:
        return E.GameState.from_json(fh.read())


def layout_json(state):
    return json.dumps(state.meta.get("layout", {}), sort_keys=True, indent=1)
