import json

import pytest

from mtgmate import cli
from mtgmate import compiler as C
from mtgmate import engine as E
from mtgmate import harness as H
from mtgmate import tm as T

EXAMPLE = "E y1 A y2 : (y1*y2 - y2 = 0)"


@pytest.fixture(scope="module")
def example_board():
    return C.compile_mate_in_n(EXAMPLE)


# ----------------------------------------------------------- scripts

def test_script_parse_and_validation():
    assert H.InputScript.parse("1, 3").values == [1, 3]
    assert H.InputScript.parse("").values == []
    with pytest.raises(ValueError):
        H.InputScript([-1])
    with pytest.raises(ValueError):
        H.InputScript([1], source="guess")


def test_script_length_must_match(example_board):
    with pytest.raises(ValueError):
        H.run_forced(example_board, [1])


# -------------------------------------------------------- forced runs

def test_mate_in_one_wins():
    state = C.compile_mate_in_n("E y1 : (y1 - x - 2 = 0)")
    v = H.run_forced(state, [2])
    assert v.won
    assert v.stats.first_infest["round"] == 2
    assert v.stats.unforced_post == []
    assert v.stats.tokens_in_graveyards == []


def test_mate_in_one_bounded_search_gives_up():
    state = C.compile_mate_in_n("E y1 : (y1 + x + 1 = 0)")
    v = H.run_forced(state, [0], x_bound=2, max_turns=5000)
    assert isinstance(v.outcome, H.NoWinWithinHorizon)
    assert "x <= 2" in v.outcome.reason


def test_example_sentence_both_ways(example_board):
    assert H.run_forced(example_board, [1, 3], x_bound=4).won
    assert not H.run_forced(example_board, [2, 3], x_bound=4).won


def test_zero_quantifier_board():
    v = H.run_forced(C.compile_mate_in_n(" : (0 = 0)"))
    assert v.won
    v = H.run_forced(C.compile_mate_in_n(" : (1 = 0)"), x_bound=2)
    assert not v.won


def test_horizon_outcome():
    m = T.three_state_loop()
    v = H.run_forced(C.compile_machine(m, T.initial_config(m)), max_turns=12)
    assert v.outcome == H.NoWinWithinHorizon(12, "horizon")


def test_pump_needs_a_script_value(example_board):
    board = example_board.copy()
    board.meta["n"] = None
    with pytest.raises(H.ScriptExhausted):
        H.run_forced(board, [])


def test_decline_the_mirror_is_a_policy(example_board):
    v = H.run_forced(example_board, [1, 3], x_bound=4, mirror="decline")
    assert isinstance(v.outcome, (H.NoWinWithinHorizon, H.FirstPlayerWin, H.SecondPlayerWin))


def _pass_or_zero(board, use_pass):
    s = board.copy()
    stats = H.RunStats()

    def branch(st, dec, acts):
        if H._is_pump_point(acts):
            if use_pass:
                return next(a for a in acts if a.kind == "pass_priority")
            return E.choose_integer(acts[0].player, acts[0].decider, 0)
        return H._mirror_action(acts, "cast")

    H._play(s, branch, lambda st: st.meta.get("count_entries", 0) > 3, 2_000_000, stats)
    return s


def test_passing_at_the_pump_equals_zero(example_board):
    a = _pass_or_zero(example_board, True)
    b = _pass_or_zero(example_board, False)
    assert (a.game_over, a.winner) == (b.game_over, b.winner)
    assert C.decode_board_tape(a, check_boundary=False).same_as(C.decode_board_tape(b, check_boundary=False))


# ------------------------------------------------------ determinism

def test_traces_are_byte_identical(example_board):
    lines = []
    for _ in range(2):
        v = H.run_forced(example_board, [1, 3], x_bound=4, trace=True)
        lines.append("\n".join(v.trace.lines()))
    assert lines[0] == lines[1]


def test_digests_are_identical():
    m = T.unary_incrementer()
    board = C.compile_machine(m, T.initial_config(m, "111"))
    runs = [H.run_forced(board, trace=True, digests=True).trace.events("decision") for _ in range(2)]
    assert [r["digest"] for r in runs[0]] == [r["digest"] for r in runs[1]]
    assert runs[0]


def test_trace_file(tmp_path, example_board):
    v = H.run_forced(example_board, [1, 3], x_bound=4, trace=True)
    path = tmp_path / "t.jsonl"
    v.trace.write(path)
    recs = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["seq"] for r in recs] == list(range(len(recs)))
    assert v.trace.events("decision")


# ------------------------------------------------------- end game

def test_end_game_detected_after_activation(example_board):
    v = H.run_forced(example_board, [1, 3], max_turns=2 * 3 + 1)
    assert isinstance(H.detect_end_game(v.final, horizon=20), H.Unknown)
    assert H.detect_end_game(v.final, horizon=20).unforced_points == 0
    assert isinstance(H.detect_end_game(v.final, horizon=1000), H.InEndGame)


def test_not_end_game_before_inputs(example_board):
    r = H.detect_end_game(example_board, horizon=10)
    assert isinstance(r, H.NotEndGame)
    assert r.round == 1


def test_end_game_unknown_on_a_loop():
    m = T.three_state_loop()
    r = H.detect_end_game(C.compile_machine(m, T.initial_config(m)), horizon=6)
    assert isinstance(r, H.Unknown)


# ------------------------------------------------------------ oracle

@pytest.mark.parametrize("text,bound,truth", [
    (EXAMPLE, 3, True),
    ("E y1 A y2 : (y1 + y2 - x = 0)", 3, True),
    ("E y1 A y2 : (y1 + y2 - x - 4 = 0)", 3, False),
    ("E y1 : (y1 - 5 = 0)", 4, False),
    ("E y1 : (y1 - 5 = 0)", 5, True),
    (" : (x - 1 = 0)", 0, False),
    ("E y1 A y2 E y3 : (y2 - y3 = 0)", 2, True),
])
def test_solve_bounded(text, bound, truth):
    assert H.solve_bounded(text, bound) is truth


def test_solve_bounded_negative_bound():
    with pytest.raises(ValueError):
        H.solve_bounded(EXAMPLE, -1)


def test_random_suite_is_seeded():
    a = [s.render() for s in H.random_suite(7, 10)]
    b = [s.render() for s in H.random_suite(7, 10)]
    assert a == b
    assert [s.n for s in H.random_suite(7, 6)] == [1, 2, 3, 1, 2, 3]


# -------------------------------------------------------------- game

def test_solve_game_true_sentence(example_board):
    r = H.solve_game(example_board, 2)
    assert r.mate_exists and r.oracle_truth and r.agreement
    assert r.control_ok()
    assert {c["quantifier"] for c in r.control} == {"E", "A"}
    for c in r.control:
        if c["quantifier"] == "A":
            assert c["decider"] == E.BOB and c["controller"] == E.BOB and c["active"] == E.ALICE


def test_solve_game_false_sentence():
    r = H.solve_game(C.compile_mate_in_n("E y1 A y2 : (y1 + y2 - x - 9 = 0)"), 2)
    assert not r.mate_exists and not r.oracle_truth and r.agreement
    assert r.control_ok()


def test_solve_game_no_inputs():
    r = H.solve_game(C.compile_mate_in_n(" : (x - 1 = 0)"), 2)
    assert r.mate_exists and r.agreement and r.control == []


# ------------------------------------------------------ bisimulation

@pytest.mark.parametrize("name,word,k", [("unary-incrementer", "1" * 50, 50), ("parity-marker", "10" * 30, 60),
                                         ("bouncer", "S", 40), ("three-state-loop", "", 40)])
def test_bisimulation(name, word, k):
    m = T.REFERENCE_MACHINES[name]()
    r = H.verify_bisimulation(m, T.initial_config(m, word), k)
    assert r.passed, r.to_dict()
    assert r.cycles_run == k


def test_bisimulation_through_halt():
    m = T.unary_incrementer()
    r = H.verify_bisimulation(m, T.initial_config(m, "111"), 10)
    # four transitions, then one more cycle in which no watcher fires
    assert r.passed and r.halted and r.cycles_run == 5


def test_corrupted_watcher_diverges():
    m = T.unary_incrementer()
    cfg = T.initial_config(m, "111")
    bad = H.corrupt_watcher(C.compile_machine(m, cfg), m, cfg)
    r = H.verify_bisimulation(m, cfg, 10, state=bad)
    assert not r.passed
    assert r.divergence["cycle"] == 1


# -------------------------------------------------------- confluence

def test_confluence_on_machine_play():
    m = T.parity_marker()
    with H.ConfluenceChecker() as chk:
        r = H.verify_bisimulation(m, T.initial_config(m, "1101"), 5)
    assert r.passed
    assert chk.failures == [] and chk.skipped == 0


def test_confluence_on_mate_play(example_board):
    with H.ConfluenceChecker() as chk:
        v = H.run_forced(example_board, [1, 3], x_bound=4)
    assert v.won
    assert chk.batches > 0 and chk.failures == []
    assert E.ORDER_PROBE is None


def test_fingerprint_ignores_ids():
    a, b = E.new_game(), E.new_game()
    E.create_permanent(b, "Moat", E.ALICE)
    E.create_permanent(a, "Moat", E.ALICE)
    a.battlefield = {pid + 100: p for pid, p in a.battlefield.items()}
    assert H.canonical_fingerprint(a) == H.canonical_fingerprint(b)


# --------------------------------------------------------------- CLI

def test_cli_round_trip(tmp_path, capsys):
    board = tmp_path / "b.json"
    assert cli.main(["compile", "--sentence", EXAMPLE, "--out", str(board)]) == 0
    assert json.loads((tmp_path / "b.json.report.json").read_text())["passed"]
    assert cli.main(["run", "--state", str(board), "--inputs", "1,3", "--x-bound", "4"]) == 0
    out = capsys.readouterr().out
    assert '"FirstPlayerWin"' in out
    assert cli.main(["solve", "--state", str(board), "--bound", "1"]) == 0


def test_cli_simulate_and_verify(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    assert cli.main(["simulate", "--machine", "unary-incrementer", "--steps", "2", "--trace", str(trace)]) == 0
    assert trace.read_text()
    assert cli.main(["verify", "--machine", "parity-marker", "--cycles", "5"]) == 0
    capsys.readouterr()


def test_cli_reports_errors(capsys):
    assert cli.main(["compile", "--sentence", "A y1 : (y1 = 0)", "--out", "/nonexistent/x"]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_report(tmp_path, capsys):
    out = tmp_path / "rep"
    assert cli.main(["report", "--out", str(out), "--max-n", "4", "--cycles", "10"]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"size_vs_n.csv", "size_vs_n.png", "forcedness.csv", "forcedness.png", "size_fit.csv"} <= names
    capsys.readouterr()
