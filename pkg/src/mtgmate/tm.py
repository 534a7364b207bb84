"""Reference Turing machines, the inverse-unary input codec and sentences.

Everything here is independent of the game engine.  The interpreter in this
module is the oracle the bisimulation checks compare against, so it is kept
as plain as possible.
"""
from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

BLANK = "_"
DIV = "D"
LEFT, RIGHT = "L", "R"


class TapeBoundaryError(RuntimeError):
    """The head tried to move left of cell 0 on the one-sided tape."""


class MalformedInput(ValueError):
    pass


class SentenceError(ValueError):
    pass


@dataclass
class TuringMachineSpec:
    states: tuple
    alphabet: tuple
    transitions: dict
    initial_state: str
    blank: str = BLANK
    divider: str | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.states = tuple(self.states)
        self.alphabet = tuple(self.alphabet)
        if self.blank not in self.alphabet:
            raise ValueError("blank symbol must belong to the alphabet")
        if self.initial_state not in self.states:
            raise ValueError(f"unknown initial state {self.initial_state!r}")
        for (q, s), (q2, s2, d) in self.transitions.items():
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"transition mentions unknown state: {(q, s)}")
            if s not in self.alphabet or s2 not in self.alphabet:
                raise ValueError(f"transition mentions unknown symbol: {(q, s)}")
            if d not in (LEFT, RIGHT):
                raise ValueError(f"bad direction {d!r}")

    def to_dict(self):
        rows = [[q, s, q2, s2, d] for (q, s), (q2, s2, d) in self.transitions.items()]
        rows.sort()
        out = {
            "name": self.name,
            "states": list(self.states),
            "alphabet": list(self.alphabet),
            "blank": self.blank,
            "initial": self.initial_state,
            "transitions": rows,
        }
        if self.divider is not None:
            out["divider"] = self.divider
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_dict(cls, d):
        trans = {(q, s): (q2, s2, m) for q, s, q2, s2, m in d["transitions"]}
        return cls(
            states=d["states"],
            alphabet=d["alphabet"],
            transitions=trans,
            initial_state=d["initial"],
            blank=d.get("blank", BLANK),
            divider=d.get("divider"),
            name=d.get("name", ""),
            meta=d.get("meta", {}),
        )


@dataclass
class MachineConfig:
    tape: dict
    head: int = 0
    state: str = ""
    steps_taken: int = 0

    def normalized(self, blank=BLANK):
        return {i: s for i, s in self.tape.items() if s != blank}

    def same_as(self, other, blank=BLANK):
        """Equality of the machine-visible configuration (step counters ignored)."""
        return (
            self.head == other.head
            and self.state == other.state
            and self.normalized(blank) == other.normalized(blank)
        )

    def tape_string(self, blank=BLANK):
        cells = self.normalized(blank)
        hi = max([self.head, *cells]) if cells else self.head
        return "".join(cells.get(i, blank) for i in range(hi + 1))

    def to_dict(self):
        return {
            "tape": {str(i): s for i, s in sorted(self.tape.items())},
            "head": self.head,
            "state": self.state,
            "steps_taken": self.steps_taken,
        }

    @classmethod
    def from_dict(cls, d):
        return cls({int(i): s for i, s in d["tape"].items()}, d["head"], d["state"], d.get("steps_taken", 0))


@dataclass
class Halted:
    config: MachineConfig


@dataclass
class ExecutionTrace:
    configs: list
    halted: bool

    @property
    def final(self):
        return self.configs[-1]


def tape_from_string(s, blank=BLANK):
    return {i: ch for i, ch in enumerate(s) if ch != blank}


def initial_config(tm, tape="", head=0):
    if isinstance(tape, str):
        tape = tape_from_string(tape, tm.blank)
    return MachineConfig(dict(tape), head, tm.initial_state, 0)


def step(tm, cfg):
    sym = cfg.tape.get(cfg.head, tm.blank)
    move = tm.transitions.get((cfg.state, sym))
    if move is None:
        return Halted(cfg)
    q2, s2, d = move
    head = cfg.head + 1 if d == RIGHT else cfg.head - 1
    if head < 0:
        raise TapeBoundaryError(f"left move from cell 0 in state {cfg.state!r}")
    tape = dict(cfg.tape)
    if s2 == tm.blank:
        tape.pop(cfg.head, None)
    else:
        tape[cfg.head] = s2
    return MachineConfig(tape, head, q2, cfg.steps_taken + 1)


def run(tm, cfg, max_steps, record=True, watch=None):
    """Run up to ``max_steps`` transitions.

    ``watch`` is an optional callable taking each new config and returning True
    to stop early; it lets callers cut a search machine off at a horizon.
    """
    configs = [cfg]
    cur = cfg
    for _ in range(max_steps):
        nxt = step(tm, cur)
        if isinstance(nxt, Halted):
            return ExecutionTrace(configs if record else [cur], True)
        cur = nxt
        if record:
            configs.append(cur)
        if watch is not None and watch(cur):
            break
    if not record:
        configs = [cur]
    halted = (cur.state, cur.tape.get(cur.head, tm.blank)) not in tm.transitions
    return ExecutionTrace(configs, halted)


def load_machine(path):
    """Read a machine file; returns (spec, initial config)."""
    d = json.loads(Path(path).read_text())
    tm = TuringMachineSpec.from_dict(d)
    tape = d.get("tape", "")
    if isinstance(tape, dict):
        tape = {int(k): v for k, v in tape.items()}
    return tm, initial_config(tm, tape, d.get("head", 0))


def dump_machine(tm, cfg, path):
    d = tm.to_dict()
    d["tape"] = {str(k): v for k, v in sorted(cfg.normalized(tm.blank).items())}
    d["head"] = cfg.head
    Path(path).write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- the codec

def encode_inputs(vals, blank=BLANK, div=DIV):
    cells = []
    for m in vals:
        if m < 0:
            raise ValueError("inputs are natural numbers")
        cells.extend([blank] * m)
        cells.append(div)
    return cells


def decode_inputs(cells, blank=BLANK, div=DIV):
    vals, run_len = [], 0
    for c in cells:
        if c == blank:
            run_len += 1
        elif c == div:
            vals.append(run_len)
            run_len = 0
        else:
            raise MalformedInput(f"unexpected cell {c!r} in input region")
    if run_len:
        raise MalformedInput("trailing blanks without a divider")
    return vals


# ------------------------------------------------------------- sentences

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass
class ArithmeticSentence:
    n: int
    quantifiers: tuple
    polynomial: object
    text: str = ""

    def __post_init__(self):
        self.quantifiers = tuple(self.quantifiers)
        if len(self.quantifiers) != self.n:
            raise SentenceError("quantifier list length must equal n")
        for i, q in enumerate(self.quantifiers):
            want = "E" if i % 2 == 0 else "A"
            if q != want:
                raise SentenceError(
                    "quantifiers must alternate E, A, E, ... starting with E "
                    f"(position {i + 1} is {q})"
                )
        allowed = {"x", *(f"y{i}" for i in range(1, self.n + 1))}
        extra = variables(self.polynomial) - allowed
        if extra:
            raise SentenceError(f"unbound variables {sorted(extra)}")

    def variable_names(self):
        return ["x"] + [f"y{i}" for i in range(1, self.n + 1)]

    def render(self):
        prefix = " ".join(f"{q} y{i}" for i, q in enumerate(self.quantifiers, 1))
        return f"{prefix} : ({render_expr(self.polynomial)} = 0)".strip()

    def to_dict(self):
        return {"text": self.render(), "n": self.n, "quantifiers": list(self.quantifiers)}


def variables(e):
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, Neg):
        return variables(e.operand)
    return variables(e.left) | variables(e.right)


def render_expr(e):
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-({render_expr(e.operand)})"
    return f"({render_expr(e.left)} {e.op} {render_expr(e.right)})"


_AST_OPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*"}


def _from_ast(node):
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return Const(node.value)
    if isinstance(node, ast.Name):
        return Var(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return Neg(_from_ast(node.operand))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
        return _from_ast(node.operand)
    if isinstance(node, ast.BinOp) and type(node.op) in _AST_OPS:
        return BinOp(_AST_OPS[type(node.op)], _from_ast(node.left), _from_ast(node.right))
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        if not (isinstance(node.right, ast.Constant) and type(node.right.value) is int and node.right.value >= 0):
            raise SentenceError("exponents must be non-negative integer literals")
        base = _from_ast(node.left)
        out = Const(1)
        for _ in range(node.right.value):
            out = base if out == Const(1) else BinOp("*", out, base)
        return out
    raise SentenceError(f"unsupported syntax: {ast.dump(node)}")


def parse_polynomial(text):
    try:
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise SentenceError(f"cannot parse polynomial {text!r}") from exc
    return _from_ast(tree.body)


_QUANT = re.compile(r"\s*([EA])\s+(y\d+)\s*")


def parse_sentence(text):
    """Parse ``E y1 A y2 : (y1*y2 - y2 = 0)``; x is implicit and existential."""
    if ":" not in text:
        raise SentenceError("expected ':' between the quantifier block and the equation")
    head, body = text.split(":", 1)
    quants, pos = [], 0
    while pos < len(head):
        m = _QUANT.match(head, pos)
        if not m:
            if head[pos:].strip():
                raise SentenceError(f"bad quantifier block near {head[pos:]!r}")
            break
        q, v = m.groups()
        if v != f"y{len(quants) + 1}":
            raise SentenceError(f"expected y{len(quants) + 1}, found {v}")
        quants.append(q)
        pos = m.end()
    body = body.strip()
    while body.startswith("(") and body.endswith(")") and _balanced(body[1:-1]):
        body = body[1:-1].strip()
    if body.count("=") != 1:
        raise SentenceError("expected exactly one '=' in the equation")
    lhs, rhs = body.split("=")
    poly = BinOp("-", parse_polynomial(lhs), parse_polynomial(rhs))
    if rhs.strip() == "0":
        poly = parse_polynomial(lhs)
    return ArithmeticSentence(len(quants), quants, poly, text)


def _balanced(s):
    depth = 0
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            return False
    return depth == 0


def _eval(e, env):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    a, b = _eval(e.left, env), _eval(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


def eval_polynomial(sentence, x, vals):
    vals = list(vals)
    if len(vals) != sentence.n:
        raise ValueError(f"expected {sentence.n} values, got {len(vals)}")
    env = {"x": x, **{f"y{i}": v for i, v in enumerate(vals, 1)}}
    return _eval(sentence.polynomial, env)


def monomials(e):
    """Expand into {sorted variable tuple: coefficient}, dropping zero terms."""
    if isinstance(e, Const):
        out = {(): e.value}
    elif isinstance(e, Var):
        out = {(e.name,): 1}
    elif isinstance(e, Neg):
        out = {k: -v for k, v in monomials(e.operand).items()}
    elif e.op in "+-":
        sign = 1 if e.op == "+" else -1
        out = dict(monomials(e.left))
        for k, v in monomials(e.right).items():
            out[k] = out.get(k, 0) + sign * v
    else:
        out = {}
        for (k1, v1), (k2, v2) in product(monomials(e.left).items(), monomials(e.right).items()):
            k = tuple(sorted(k1 + k2))
            out[k] = out.get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


# -------------------------------------------------- search-machine builder

START, PAD, XEND, POS, NEG = "S", "A", "E", "P", "N"
NEXT_X = "next_x"
HALT = "halt"


def unit_symbol(mask):
    return "1" + "".join(chr(ord("a") + b) for b in range(8) if mask >> b & 1)


class _Builder:
    def __init__(self, alphabet):
        self.alphabet = alphabet
        self.trans = {}
        self.states = []
        self._n = 0

    def state(self, label):
        self._n += 1
        name = f"{label}.{self._n}"
        self.states.append(name)
        return name

    def named(self, name):
        self.states.append(name)
        return name

    def on(self, q, sym, write, move, nxt):
        assert (q, sym) not in self.trans, (q, sym)
        self.trans[(q, sym)] = (nxt, write, move)


def _search_layout(sentence):
    terms = sorted(monomials(sentence.polynomial).items(), key=lambda kv: (len(kv[0]), kv[0]))
    depth = max((len(k) for k, _ in terms), default=0)
    return terms, depth


def search_alphabet(sentence):
    _, depth = _search_layout(sentence)
    units = [unit_symbol(m) for m in range(2 ** depth)] or ["1"]
    if "1" not in units:
        units.insert(0, "1")
    return [BLANK, START, PAD, DIV, XEND, POS, NEG, *units]


def build_search_machine(sentence):
    """Machine that reads c1..cn from the tape and searches x = 0, 1, 2, ...

    Layout after the init pass: cell 0 is S, cell 1 the pad A, then one unary
    block per input terminated by D (inputs sit in reverse round order, the
    order the write gadget produces), then the x block terminated by E, then
    a signed unary balance of P/N marks.  Every monomial is accumulated into
    the balance by nested marking loops; a mark bit per loop level keeps
    repeated variables such as x*x independent.  An empty balance means
    P(x, c) = 0 and the machine halts; otherwise it erases the balance, grows
    x by one (passing through the ``next_x`` state) and tries again.
    """
    terms, depth = _search_layout(sentence)
    alphabet = search_alphabet(sentence)
    units = [s for s in alphabet if s.startswith("1")]
    n = sentence.n
    b = _Builder(alphabet)

    def block_of(var):
        return n if var == "x" else n - int(var[1:])

    def goto_start(cont):
        q = b.state("home")
        for s in alphabet:
            if s == START:
                b.on(q, s, s, RIGHT, cont)
            elif s != BLANK:
                b.on(q, s, s, LEFT, q)
        return q

    def seek_block(blk, cont):
        # head starts on the pad (cell 1)
        q0 = b.state(f"seek{blk}")
        if blk == 0:
            b.on(q0, PAD, PAD, RIGHT, cont)
            return q0
        ks = [b.state(f"seek{blk}k{j}") for j in range(blk)]
        b.on(q0, PAD, PAD, RIGHT, ks[0])
        for j, k in enumerate(ks):
            for u in units:
                b.on(k, u, u, RIGHT, k)
            b.on(k, DIV, DIV, RIGHT, ks[j + 1] if j + 1 < blk else cont)
        return q0

    def scan_states(level, blk):
        return b.state(f"scan{blk}l{level}"), b.state(f"clear{blk}l{level}")

    def fill_scan(q, clr, level, blk, found, exhausted):
        term = XEND if blk == n else DIV
        bit = 1 << level
        for u in units:
            m = _mask(u)
            if m & bit:
                b.on(q, u, u, RIGHT, q)
                b.on(clr, u, unit_symbol(m & ~bit), LEFT, clr)
            else:
                b.on(q, u, unit_symbol(m | bit), RIGHT, found)
                b.on(clr, u, u, LEFT, clr)
        b.on(q, term, term, LEFT, clr)
        for s in (DIV, PAD):
            b.on(clr, s, s, RIGHT, exhausted)

    def add_chain(sign, count, cont):
        entry = cont
        for _ in range(count):
            entry = add_one(sign, entry)
        return entry

    def add_one(sign, cont):
        other = NEG if sign == POS else POS
        walk = b.state("walk")
        look = b.state("look")
        put = b.state("put")
        back = goto_start(cont)
        for s in alphabet:
            if s != BLANK:
                b.on(walk, s, s, RIGHT, walk)
        b.on(walk, BLANK, BLANK, LEFT, look)
        b.on(look, other, BLANK, LEFT, back)
        for s in (sign, XEND):
            b.on(look, s, s, RIGHT, put)
        b.on(put, BLANK, sign, LEFT, back)
        return walk

    def walk_end(cont):
        q = b.state("toend")
        for s in alphabet:
            if s != BLANK:
                b.on(q, s, s, RIGHT, q)
        b.on(q, BLANK, BLANK, LEFT, cont)
        return q

    def back_to_mark(level, scan_state):
        # only the block scanned at this level carries the level's bit, so the
        # rightmost such unit is where the interrupted scan resumes
        q = b.state(f"back{level}")
        bit = 1 << level
        for s in alphabet:
            if s == BLANK:
                continue
            if s in units and _mask(s) & bit:
                b.on(q, s, s, RIGHT, scan_state)
            else:
                b.on(q, s, s, LEFT, q)
        return q

    def resume(level, scan_state):
        return walk_end(back_to_mark(level, scan_state))

    check = b.state("check")
    consts = [(v, c) for v, c in terms if not v]
    var_terms = sorted(((tuple(sorted(v, key=block_of)), c) for v, c in terms if v),
                       key=lambda t: ([block_of(x) for x in t[0]], t[1]))
    first_blocks = [block_of(v[0]) for v, _ in var_terms]
    scans = [None] * len(var_terms)

    def enter(ti, from_blk):
        """State that brings the head to term ti's first block and starts its scan.

        ``from_blk`` is the block whose first cell the head is on, or None
        when the position is unknown.
        """
        if ti == len(var_terms):
            return check
        target = first_blocks[ti]
        if from_blk is None or target < from_blk:
            return goto_start(seek_block(target, scans[ti]))
        if target == from_blk:
            return scans[ti]
        hops = [b.state(f"hop{ti}k{j}") for j in range(target - from_blk)]
        for j, q in enumerate(hops):
            for u in units:
                b.on(q, u, u, RIGHT, q)
            b.on(q, DIV, DIV, RIGHT, hops[j + 1] if j + 1 < len(hops) else scans[ti])
        return hops[0]

    for ti in range(len(var_terms) - 1, -1, -1):
        vars_, coef = var_terms[ti]
        sign = POS if coef > 0 else NEG
        blocks = [block_of(v) for v in vars_]
        qs = [scan_states(lv, blk) for lv, blk in enumerate(blocks)]
        for lv, blk in enumerate(blocks):
            if lv + 1 < len(blocks):
                found = goto_start(seek_block(blocks[lv + 1], qs[lv + 1][0]))
            else:
                found = add_chain(sign, abs(coef), resume(lv, qs[lv][0]))
            exhausted = resume(lv - 1, qs[lv - 1][0]) if lv else enter(ti + 1, blk)
            fill_scan(*qs[lv], lv, blk, found, exhausted)
        scans[ti] = qs[0][0]

    first = enter(0, None)
    if consts:
        (_, c), = consts
        first = add_chain(POS if c > 0 else NEG, abs(c), first)
    entries = [first]

    # check: walk to the end; E right before the blank means an empty balance
    walk = b.state("cwalk")
    look = b.state("clook")
    clear = b.state("cclear")
    nxt = b.named(NEXT_X)
    halt = b.named(HALT)
    for s in alphabet:
        if s == START:
            b.on(check, s, s, RIGHT, walk)
        elif s != BLANK:
            b.on(check, s, s, LEFT, check)
    for s in alphabet:
        if s != BLANK:
            b.on(walk, s, s, RIGHT, walk)
    b.on(walk, BLANK, BLANK, LEFT, look)
    b.on(look, XEND, XEND, RIGHT, halt)
    for s in (POS, NEG):
        b.on(look, s, BLANK, LEFT, clear)
        b.on(clear, s, BLANK, LEFT, clear)
    b.on(clear, XEND, "1", RIGHT, nxt)
    b.on(nxt, BLANK, XEND, LEFT, goto_start(entries[0]))

    # init: pad cell 1, turn input blanks into units, place the x block end
    init = b.named("init")
    pad = b.state("pad")
    b.on(init, START, START, RIGHT, pad)
    conv = [b.state(f"conv{j}") for j in range(n + 1)]
    b.on(pad, BLANK, PAD, RIGHT, conv[0])
    for j in range(n):
        b.on(conv[j], BLANK, "1", RIGHT, conv[j])
        b.on(conv[j], DIV, DIV, RIGHT, conv[j + 1])
    b.on(conv[n], BLANK, XEND, LEFT, goto_start(entries[0]))

    trans = {k: (q2, s2, d) for k, (q2, s2, d) in b.trans.items()}
    states = ["init"] + [s for s in b.states if s != "init"]
    return TuringMachineSpec(
        states=states,
        alphabet=alphabet,
        transitions=trans,
        initial_state="init",
        blank=BLANK,
        divider=DIV,
        name=f"search[{sentence.render()}]",
        meta={"sentence": sentence.render(), "next_x": NEXT_X, "n": n},
    )


def _mask(u):
    return sum(1 << (ord(ch) - ord("a")) for ch in u[1:])


def search_initial_config(tm, values):
    """Tape the compiled board presents at activation: S, a pad, then inputs.

    The write gadget lays the rounds out nearest-first, so the input region
    holds the values in reverse round order.
    """
    cells = [START, BLANK] + encode_inputs(list(reversed(values)))
    tape = {i: c for i, c in enumerate(cells) if c != BLANK}
    return MachineConfig(tape, 0, tm.initial_state, 0)


def search_until(tm, values, x_bound, max_steps=10**7):
    """Reference run of a search machine, cut off once x would exceed ``x_bound``.

    Returns (halted, steps).
    """
    cfg = search_initial_config(tm, values)
    entries = 0
    cur = cfg
    for _ in range(max_steps):
        nxt = step(tm, cur)
        if isinstance(nxt, Halted):
            return True, cur.steps_taken
        cur = nxt
        if cur.state == NEXT_X:
            entries += 1
            if entries > x_bound:
                return False, cur.steps_taken
    return False, cur.steps_taken


# ------------------------------------------------------- reference machines

def unary_incrementer():
    """Walk right over 1s and write one more 1 on the first blank."""
    t = {("scan", "1"): ("scan", "1", RIGHT), ("scan", BLANK): ("done", "1", RIGHT)}
    return TuringMachineSpec(("scan", "done"), (BLANK, "1"), t, "scan", name="unary-incrementer")


def parity_marker():
    """Scan a binary word; on the first blank write E (even ones) or O (odd)."""
    t = {
        ("even", "0"): ("even", "0", RIGHT),
        ("even", "1"): ("odd", "1", RIGHT),
        ("odd", "0"): ("odd", "0", RIGHT),
        ("odd", "1"): ("even", "1", RIGHT),
        ("even", BLANK): ("done", "E", RIGHT),
        ("odd", BLANK): ("done", "O", RIGHT),
    }
    return TuringMachineSpec(("even", "odd", "done"), (BLANK, "0", "1", "E", "O"), t, "even", name="parity-marker")


def three_state_loop():
    """Never halts: zig-zags right, leaving c's behind and a b at the frontier."""
    t = {
        ("p", BLANK): ("q", "a", RIGHT),
        ("p", "b"): ("q", "b", RIGHT),
        ("q", BLANK): ("r", "b", LEFT),
        ("r", "a"): ("p", "c", RIGHT),
        ("r", "b"): ("p", "c", RIGHT),
    }
    return TuringMachineSpec(("p", "q", "r"), (BLANK, "a", "b", "c"), t, "p", name="three-state-loop")


def bouncer():
    """Non-halting machine that walks back and forth, used to exercise left moves."""
    t = {
        ("r", BLANK): ("l", "x", LEFT),
        ("r", "x"): ("r", "x", RIGHT),
        ("r", "S"): ("r", "S", RIGHT),
        ("l", "x"): ("l", "x", LEFT),
        ("l", "S"): ("r", "S", RIGHT),
    }
    return TuringMachineSpec(("r", "l"), (BLANK, "S", "x"), t, "r", name="bouncer")


def empty_machine():
    return TuringMachineSpec(("h",), (BLANK,), {}, "h", name="empty")


REFERENCE_MACHINES = {
    "unary-incrementer": unary_incrementer,
    "parity-marker": parity_marker,
    "three-state-loop": three_state_loop,
    "bouncer": bouncer,
    "empty": empty_machine,
}
