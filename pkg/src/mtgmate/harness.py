"""Running compiled boards: forced play, end-game detection, the bounded solver
and the bisimulation check against the reference interpreter.

Every entry point works on a private copy of the state it is given.
"""
from __future__ import annotations

import itertools
import json
import random
import time
from collections import Counter
from dataclasses import dataclass, field

from . import compiler as C
from . import engine as E
from . import tm as T
from .cards import ForcednessError


class ScriptExhausted(E.RulesError):
    pass


class VerificationFailure(AssertionError):
    pass


# ------------------------------------------------------------------ types

@dataclass
class InputScript:
    """Integers fed to the write gadget, one per round, for whoever decides that round."""
    values: list = field(default_factory=list)
    source: str = "scripted"

    def __post_init__(self):
        self.values = [int(v) for v in self.values]
        if any(v < 0 for v in self.values):
            raise ValueError("input values must be natural numbers")
        if self.source not in ("scripted", "exhaustive-search"):
            raise ValueError(f"unknown script source {self.source!r}")

    @classmethod
    def parse(cls, text):
        text = (text or "").strip()
        return cls([int(v) for v in text.split(",")] if text else [])

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class FirstPlayerWin:
    turn: int
    round: int

    def to_dict(self):
        return {"outcome": "FirstPlayerWin", "turn": self.turn, "round": self.round}


@dataclass(frozen=True)
class NoWinWithinHorizon:
    max_turns: int
    reason: str = "horizon"

    def to_dict(self):
        return {"outcome": "NoWinWithinHorizon", "max_turns": self.max_turns, "reason": self.reason}


@dataclass(frozen=True)
class SecondPlayerWin:
    turn: int
    round: int

    def to_dict(self):
        return {"outcome": "SecondPlayerWin", "turn": self.turn, "round": self.round}


@dataclass
class RunStats:
    """Forcedness and control bookkeeping gathered while a board is played."""
    hist_pre: Counter = field(default_factory=Counter)
    hist_post: Counter = field(default_factory=Counter)
    unforced_post: list = field(default_factory=list)
    turns: list = field(default_factory=list)
    first_infest: dict | None = None
    decisions: int = 0
    machine_steps: int = 0
    tokens_in_graveyards: list = field(default_factory=list)

    @property
    def forced_post(self):
        return all(k == 1 for k in self.hist_post)

    def merge(self, other):
        self.hist_pre.update(other.hist_pre)
        self.hist_post.update(other.hist_post)
        self.unforced_post.extend(other.unforced_post)
        self.decisions += other.decisions
        self.tokens_in_graveyards.extend(other.tokens_in_graveyards)

    def to_dict(self):
        return {
            "hist_pre": {str(k): v for k, v in sorted(self.hist_pre.items())},
            "hist_post": {str(k): v for k, v in sorted(self.hist_post.items())},
            "unforced_post": self.unforced_post,
            "turns": self.turns,
            "first_infest": self.first_infest,
            "decisions": self.decisions,
            "machine_steps": self.machine_steps,
            "tokens_in_graveyards": self.tokens_in_graveyards,
        }


class GameTrace:
    """Ordered record of engine events and decisions; serializes as JSON lines."""

    def __init__(self, digests=False):
        self.records = []
        self.digests = digests

    def sink(self, state, event, info):
        rec = {"seq": len(self.records), "event": event, "turn": state.turn_number, "round": state.round,
               "step": state.phase_step, "active": state.active_player,
               "controller": state.turn_controller}
        rec.update(info)
        self.records.append(rec)

    def decision(self, state, dec, acts, action):
        rec = {"seq": len(self.records), "event": "decision", "turn": state.turn_number, "round": state.round,
               "step": state.phase_step, "active": state.active_player, "controller": state.turn_controller,
               "player": dec.player, "decider": dec.decider, "kind": dec.kind, "options": len(acts),
               "action": action.to_dict()}
        if self.digests:
            rec["digest"] = state.digest()
        self.records.append(rec)

    def lines(self):
        return [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.records]

    def write(self, path):
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line)
                fh.write("\n")

    def events(self, name):
        return [r for r in self.records if r["event"] == name]


@dataclass
class Verdict:
    outcome: object
    trace: GameTrace | None
    stats: RunStats
    final: E.GameState | None = None

    @property
    def won(self):
        return isinstance(self.outcome, FirstPlayerWin)

    def to_dict(self):
        return {"outcome": self.outcome.to_dict(), "stats": self.stats.to_dict()}


# ------------------------------------------------------------ play loop

def _activated(state):
    n = state.meta.get("n")
    return n is None or state.round > n


def _is_pump_point(acts):
    return any(a.kind == "choose_integer" for a in acts)


def _graveyard_tokens(state):
    return [c for pl in state.players for c in pl.graveyard if c.endswith(C.TOKEN_SUFFIX)]


def _play(state, branch, stop, step_budget, stats, trace=None):
    """Advance ``state`` in place.

    Forced decisions are taken directly.  When more than one action is legal,
    ``branch(state, dec, acts)`` returns the action to take, or ``None`` to hand
    the branch point back to the caller.  Returns "over", "stop" or "branch".
    """
    last_turn = None
    budget = step_budget
    while True:
        if state.game_over:
            return "over"
        if stop is not None and stop(state):
            return "stop"
        if state.turn_number != last_turn:
            last_turn = state.turn_number
            stats.turns.append({"turn": state.turn_number, "round": state.round,
                                "active": state.active_player, "controller": state.turn_controller})
            bad = _graveyard_tokens(state)
            if bad:
                stats.tokens_in_graveyards.extend(bad)
        budget -= 1
        if budget < 0:
            raise E.StepBudgetExceeded(
                f"step budget {step_budget} exhausted on turn {state.turn_number} ({state.phase_step})")
        dec = E.pending_decision(state)
        if dec is None:
            E._advance_inplace(state)
            continue
        acts = E.legal_actions(state)
        post = _activated(state)
        (stats.hist_post if post else stats.hist_pre)[len(acts)] += 1
        stats.decisions += 1
        if len(acts) == 1:
            action = acts[0]
        else:
            if post:
                stats.unforced_post.append({"turn": state.turn_number, "step": state.phase_step,
                                            "options": [a.to_dict() for a in acts]})
            action = branch(state, dec, acts)
            if action is None:
                return "branch"
        if action.kind == "cast" and action.card == "Infest" and stats.first_infest is None:
            stats.first_infest = {"turn": state.turn_number, "round": state.round,
                                  "active": state.active_player}
        if trace is not None:
            trace.decision(state, dec, acts, action)
        E._apply_inplace(state, action)


def _mirror_action(acts, policy):
    want = "cast" if policy == "cast" else "pass_priority"
    for a in acts:
        if a.kind == want:
            return a
    raise ForcednessError(f"mirror policy {policy!r} matches none of {[a.to_dict() for a in acts]}")


def _outcome(state):
    if state.winner == E.ALICE:
        if not state.players[E.BOB].lost_flag:
            raise VerificationFailure("Alice recorded as winner without Bob's loss flag")
        return FirstPlayerWin(state.turn_number, state.round)
    return SecondPlayerWin(state.turn_number, state.round)


def run_forced(state, script=None, max_turns=2000, step_budget=2_000_000, trace=False, digests=False,
               mirror="cast", x_bound=None):
    """Play ``state`` taking the unique legal action at every forced point.

    Script values are consumed at the input-pump windows; the Panoptic Mirror
    option follows ``mirror`` ("cast" or "decline").  Any other point with two
    or more legal actions raises ``ForcednessError``.  ``x_bound`` stops a
    search board once the machine would try x = x_bound + 1.
    """
    if script is None:
        script = InputScript()
    elif not isinstance(script, InputScript):
        script = InputScript(list(script))
    n = state.meta.get("n")
    if n and len(script) != n:
        raise ValueError(f"board expects {n} inputs, script has {len(script)}")
    s = state.copy()
    tr = GameTrace(digests) if trace else None
    if tr is not None:
        s.sink = tr.sink
    stats = RunStats()
    queue = list(script.values)

    def branch(st, dec, acts):
        if _is_pump_point(acts):
            if not queue:
                raise ScriptExhausted(f"no input left for the pump on turn {st.turn_number}")
            return E.choose_integer(acts[0].player, acts[0].decider, queue.pop(0))
        if dec.kind == "choice":
            return _mirror_action(acts, mirror)
        raise ForcednessError(
            f"unforced point on turn {st.turn_number} ({st.phase_step}): {[a.to_dict() for a in acts]}")

    def stop(st):
        if st.turn_number > max_turns:
            return True
        return x_bound is not None and st.meta.get("count_entries", 0) > x_bound

    result = _play(s, branch, stop, step_budget, stats, tr)
    stats.machine_steps = s.meta.get("machine_steps", 0)
    stats.tokens_in_graveyards.extend(_graveyard_tokens(s))
    if result == "over":
        outcome = _outcome(s)
    elif s.turn_number > max_turns:
        outcome = NoWinWithinHorizon(max_turns, "horizon")
    else:
        outcome = NoWinWithinHorizon(max_turns, f"search bound x <= {x_bound}")
    s.sink = None
    return Verdict(outcome, tr, stats, s)


# -------------------------------------------------------- end-game check

@dataclass(frozen=True)
class InEndGame:
    turn: int

    def to_dict(self):
        return {"result": "InEndGame", "turn": self.turn}


@dataclass(frozen=True)
class NotEndGame:
    turn: int
    round: int
    step: str
    options: tuple

    def to_dict(self):
        return {"result": "NotEndGame", "turn": self.turn, "round": self.round, "step": self.step,
                "options": list(self.options)}


@dataclass(frozen=True)
class Unknown:
    horizon: int
    unforced_points: int = 0

    def to_dict(self):
        return {"result": "Unknown", "horizon": self.horizon, "unforced_points": self.unforced_points}


def detect_end_game(state, horizon, step_budget=2_000_000):
    """Bounded check of "no unforced moves for either player remaining".

    ``horizon`` counts turns from the current one.
    """
    if state.game_over:
        return InEndGame(state.turn_number)
    s = state.copy()
    limit = s.turn_number + horizon
    found = []

    def branch(st, dec, acts):
        found.append(NotEndGame(st.turn_number, st.round, st.phase_step, tuple(a.kind for a in acts)))
        return None

    result = _play(s, branch, lambda st: st.turn_number > limit, step_budget, RunStats())
    if result == "branch":
        return found[0]
    if result == "over":
        return InEndGame(s.turn_number)
    return Unknown(horizon, 0)


# ------------------------------------------------------------ the oracle

def solve_bounded(sentence, bound):
    """Truth of the sentence with y1..yn and x all restricted to 0..bound.

    x is quantified innermost: the compiled machine receives every y before it
    starts searching, so that is the reading the game decides.
    """
    if isinstance(sentence, str):
        sentence = T.parse_sentence(sentence)
    if bound < 0:
        raise ValueError("bound must be non-negative")
    rng = range(bound + 1)

    def rec(i, vals):
        if i == sentence.n:
            return any(T.eval_polynomial(sentence, x, vals) == 0 for x in rng)
        if sentence.quantifiers[i] == "E":
            return any(rec(i + 1, vals + [v]) for v in rng)
        return all(rec(i + 1, vals + [v]) for v in rng)

    return rec(0, [])


def random_sentence(rng, n, coeff=3, max_terms=3, max_degree=2):
    """A random alternating sentence with integer coefficients in [-coeff, coeff]."""
    names = ["x"] + [f"y{i}" for i in range(1, n + 1)]
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        c = 0
        while c == 0:
            c = rng.randint(-coeff, coeff)
        mono = [rng.choice(names) for _ in range(rng.randint(0, max_degree))]
        body = "*".join(sorted(mono))
        terms.append((c, body))
    text = ""
    for i, (c, body) in enumerate(terms):
        mag = abs(c)
        piece = body if (mag == 1 and body) else (f"{mag}*{body}" if body else str(mag))
        if i == 0:
            text = piece if c > 0 else f"-{piece}"
        else:
            text += f" + {piece}" if c > 0 else f" - {piece}"
    quants = " ".join(f"{'E' if i % 2 == 0 else 'A'} y{i + 1}" for i in range(n))
    return T.parse_sentence(f"{quants} : ({text} = 0)")


# ------------------------------------------------------------- the game

@dataclass
class SolveResult:
    mate_exists: bool
    strategy: dict
    oracle_truth: bool
    agreement: bool
    bound: int
    leaves: int = 0
    control: list = field(default_factory=list)
    stats: RunStats = field(default_factory=RunStats)
    seconds: float = 0.0
    sentence: str = ""

    def control_ok(self):
        """Every universal round had Bob deciding Alice's turn, every existential one Alice."""
        return all((c["decider"] == E.BOB) == (c["quantifier"] == "A") and
                   (c["quantifier"] != "A" or c["controller"] != c["active"]) for c in self.control)

    def to_dict(self):
        return {"sentence": self.sentence, "bound": self.bound, "mate_exists": self.mate_exists,
                "oracle_truth": self.oracle_truth, "agreement": self.agreement, "leaves": self.leaves,
                "control_ok": self.control_ok(), "seconds": round(self.seconds, 3),
                "strategy": self.strategy, "stats": self.stats.to_dict()}


def solve_game(state, bound, explore_decline=False, max_turns=100000, step_budget=5_000_000):
    """Minimax over the integer choices of a compiled mate-in-n board.

    Alice maximizes at the pumps she decides, Bob minimizes at the pumps he
    decides (the rounds whose Alice turn he controls) and at the Panoptic
    Mirror option.  Leaves are forced runs that end in a win, or stop once the
    machine's x search passes ``bound``.  The answer is cross-checked against
    ``solve_bounded``.
    """
    sentence = T.parse_sentence(state.meta["sentence"]["text"])
    t0 = time.perf_counter()
    totals = RunStats()
    control = []
    counter = [0]
    quants = list(sentence.quantifiers)

    def stop(st):
        return st.turn_number > max_turns or st.meta.get("count_entries", 0) > bound

    def hold(st, dec, acts):
        if _is_pump_point(acts) or dec.kind == "choice":
            return None
        raise ForcednessError(
            f"unforced point on turn {st.turn_number} ({st.phase_step}): {[a.to_dict() for a in acts]}")

    def value(s):
        stats = RunStats()
        result = _play(s, hold, stop, step_budget, stats)
        totals.merge(stats)
        totals.turns.extend(stats.turns)
        if result != "branch":
            counter[0] += 1
            totals.tokens_in_graveyards.extend(_graveyard_tokens(s))
            won = result == "over" and s.winner == E.ALICE
            leaf = {"leaf": "win" if won else ("loss" if result == "over" else "no win"),
                    "turn": s.turn_number, "steps": s.meta.get("machine_steps", 0)}
            return won, leaf
        dec = E.pending_decision(s)
        acts = E.legal_actions(s)
        if _is_pump_point(acts):
            decider = acts[0].decider
            r = s.round
            q = quants[r - 1] if 1 <= r <= len(quants) else "?"
            control.append({"round": r, "turn": s.turn_number, "quantifier": q, "active": s.active_player,
                            "controller": s.turn_controller, "decider": decider})
            options = [(str(k), E.choose_integer(acts[0].player, decider, k)) for k in range(bound + 1)]
        else:
            decider = dec.decider
            options = [("cast", _mirror_action(acts, "cast"))]
            if explore_decline:
                options.append(("decline", _mirror_action(acts, "decline")))
        maximize = decider == E.ALICE
        children = {}
        best = not maximize
        for label, action in options:
            child = s.copy() if len(options) > 1 else s
            E._apply_inplace(child, action)
            v, sub = value(child)
            children[label] = sub
            if v == maximize:
                best = v
                break
        node = {"round": s.round, "decider": "Alice" if maximize else "Bob",
                "point": "pump" if _is_pump_point(acts) else "mirror", "value": best, "children": children}
        return best, node

    mate, tree = value(state.copy())
    truth = solve_bounded(sentence, bound)
    return SolveResult(mate, tree, truth, mate == truth, bound, counter[0], control, totals,
                       time.perf_counter() - t0, sentence.render())


# ------------------------------------------------------- bisimulation

@dataclass
class BisimReport:
    machine: str
    cycles_requested: int
    cycles_run: int = 0
    divergence: dict | None = None
    halted: bool = False
    histogram: dict = field(default_factory=dict)
    seconds: float = 0.0
    confluence_batches: int = 0

    @property
    def passed(self):
        return self.divergence is None and set(self.histogram) <= {1}

    def to_dict(self):
        return {"machine": self.machine, "cycles_requested": self.cycles_requested,
                "cycles_run": self.cycles_run, "divergence": self.divergence, "halted": self.halted,
                "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "seconds": round(self.seconds, 3), "passed": self.passed}


def corrupt_watcher(state, tm, cfg):
    """Negative control: make the watcher that fires first write the wrong symbol."""
    s = state.copy()
    sym = cfg.tape.get(cfg.head, tm.blank)
    tags = s.meta["symbol_tags"]
    for wid in s.meta["banks"][cfg.state]:
        w = s.battlefield[wid]
        if w.gadget.get("symbol") != sym:
            continue
        written = E.edited_word(w, "Zombie")
        wrong = next(t for t in sorted(tags.values()) if t != written and t != C.DIVIDER_TAG)
        w.text_edits = [e if not (e.kind == "replace_creature_type" and e.from_tag == "Zombie")
                        else E.TextEdit(e.kind, e.from_tag, wrong) for e in w.text_edits]
        return s
    raise ValueError("no watcher for the first transition")


def verify_bisimulation(tm, cfg, k, state=None, step_budget=200_000):
    """Compare engine play with the reference interpreter at every cycle boundary."""
    t0 = time.perf_counter()
    cfg = cfg or T.initial_config(tm)
    s = (state if state is not None else C.compile_machine(tm, cfg)).copy()
    ref_run = T.run(tm, cfg, k)
    ref, ref_halted = ref_run.configs, ref_run.halted
    report = BisimReport(tm.name or "machine", k)
    stats = RunStats()

    def refuse(st, dec, acts):
        raise ForcednessError(f"unforced point on turn {st.turn_number}: {[a.to_dict() for a in acts]}")

    for cycle in range(1, k + 1):
        target = cfg.steps_taken + cycle
        _play(s, refuse, lambda st: C.at_cycle_boundary(st) and st.meta["machine_steps"] >= target,
              step_budget, stats)
        want = ref[min(cycle, len(ref) - 1)]
        try:
            got = C.decode_board_tape(s)
        except C.DecodeError as exc:
            report.divergence = {"cycle": cycle, "turn": s.turn_number, "error": str(exc),
                                 "reference": want.to_dict()}
            break
        report.cycles_run = cycle
        if (got.tape, got.head, got.state) != (want.tape, want.head, want.state):
            report.divergence = {"cycle": cycle, "turn": s.turn_number, "engine": got.to_dict(),
                                 "reference": want.to_dict()}
            break
        if s.game_over:
            report.halted = True
            if s.winner != E.ALICE or not (ref_halted and cycle == len(ref)):
                report.divergence = {"cycle": cycle, "turn": s.turn_number,
                                     "error": "engine ended the game but the reference had not halted"}
            break
        if cycle >= len(ref):
            report.divergence = {"cycle": cycle, "turn": s.turn_number,
                                 "error": "reference halted but the engine kept running"}
            break
    report.histogram = dict(stats.hist_post)
    report.seconds = time.perf_counter() - t0
    return report


# ------------------------------------------------- trigger confluence

def canonical_fingerprint(state):
    """Board summary that ignores object ids and timestamps."""
    def host(pid):
        p = state.battlefield.get(pid)
        return p.name if p is not None else None

    perms = sorted(json.dumps({
        "name": p.name, "controller": p.controller, "owner": p.owner, "types": sorted(E.creature_types(p)),
        "colors": sorted(p.colors), "counters": dict(sorted(p.counters.items())), "phased": p.phased_out,
        "tapped": p.tapped, "edits": [[e.kind, e.from_tag, e.to_tag] for e in p.text_edits],
        "gadget": p.gadget, "attached": host(p.attached_to), "ueot": list(p.ueot), "damage": p.damage,
    }, sort_keys=True) for p in state.battlefield.values())
    players = [[pl.life, pl.poison, sorted(pl.hand), list(pl.library), sorted(pl.graveyard), pl.lost_flag]
               for pl in state.players]
    stack = [(e.kind, e.source, e.controller) for e in state.stack]
    extra = {k: state.meta.get(k) for k in ("machine_steps", "count_entries")}
    return json.dumps([perms, players, stack, extra, len(state.delayed)], sort_keys=True)


class ConfluenceChecker:
    """Installs the engine's order probe and replays each multi-trigger batch
    in every order (up to ``max_batch`` triggers), comparing the outcomes once
    the batch and everything it caused has resolved."""

    def __init__(self, max_batch=6):
        self.max_batch = max_batch
        self.batches = 0
        self.skipped = 0
        self.failures = []
        self._busy = False

    def __enter__(self):
        self._prev = E.ORDER_PROBE
        E.ORDER_PROBE = self.probe
        return self

    def __exit__(self, *exc):
        E.ORDER_PROBE = self._prev
        return False

    def probe(self, state, triggers, player):
        if self._busy:
            return
        group = sorted((t for t in triggers if t.controller == player), key=E._order_key)
        rest = [t for t in triggers if t.controller != player]
        if len(group) > self.max_batch:
            self.skipped += 1
            return
        self._busy = True
        try:
            prints = set()
            for perm in itertools.permutations(group):
                fp = self._replay(state, list(perm), rest, player)
                if fp is None:
                    self.skipped += 1
                    return
                prints.add(fp)
            self.batches += 1
            if len(prints) > 1:
                self.failures.append({"turn": state.turn_number, "step": state.phase_step,
                                      "kinds": [t.kind for t in group], "outcomes": len(prints)})
        finally:
            self._busy = False

    @staticmethod
    def _replay(state, group, rest, player):
        s = state.copy()
        base = len(s.stack)
        ap = s.active_player
        first, second = (group, sorted(rest, key=E._order_key)) if player == ap else \
            (sorted(rest, key=E._order_key), group)
        for t in first + second:
            s.stack.append(E.StackEntry("ability", t.kind, t.controller, list(t.data.get("targets", [])),
                                        dict(t.data), t.source_id))
        E.settle(s)
        guard = 0
        while len(s.stack) > base and not s.game_over:
            if s.pending_choice is not None:
                return None
            E._resolve_top_inplace(s)
            guard += 1
            if guard > 10000:
                return None
        return canonical_fingerprint(s)


def load_reference_machine(name_or_path):
    """A bundled machine by name, or a machine file."""
    from importlib import resources
    bundled = resources.files("mtgmate") / "machines" / f"{name_or_path}.json"
    if bundled.is_file():
        return T.load_machine(str(bundled))
    if name_or_path in T.REFERENCE_MACHINES:
        m = T.REFERENCE_MACHINES[name_or_path]()
        return m, T.initial_config(m)
    return T.load_machine(name_or_path)


def random_suite(seed, count, ns=(1, 2, 3)):
    rng = random.Random(seed)
    return [random_sentence(rng, ns[i % len(ns)]) for i in range(count)]
