import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btaodv.cli import EXIT_IO, EXIT_OK, EXIT_SCENARIO, OUTPUT_FILES, main, run
from btaodv.scenario import (
    BUILTINS,
    ScenarioSemanticError,
    ScenarioSyntaxError,
    format_scenario,
    parse_scenario,
)

TWO_NODE = "piconet P1 master 0 slaves 1\nflow 0 1 start 0 stop 100 rate 10 size 20\n"


def test_migration_builtin_shape():
    sc = parse_scenario(BUILTINS["paper-scatternet"])
    net = sc.scatternet()
    assert len(net.nodes()) == 20
    assert sorted(p.master for p in net.piconets.values()) == [1, 12, 17]
    assert sc.config.queue_length == 50 and sc.config.num_nodes == 20


def test_all_builtins_parse():
    for text in BUILTINS.values():
        parse_scenario(text)


@pytest.mark.parametrize(
    "text, err, line",
    [
        ("", ScenarioSyntaxError, 1),
        ("# only a comment\n", ScenarioSyntaxError, 1),
        ("piconet P1 master 1 slaves 2,3,4,5,6,7,8,9\n", ScenarioSemanticError, 1),
        ("piconet P1 master 1 slaves 2\nbogus 1 2\n", ScenarioSyntaxError, 2),
        ("piconet P1 master 1 slaves 2\nflow 1 9 start 0 stop 10 rate 1 size 5\n", ScenarioSemanticError, 2),
        ("piconet P1 master 1 slaves 2\nflow 1 2 start 0 stop 10 rate 1 size 400\n", ScenarioSemanticError, 2),
        ("piconet P1 master 1 slaves 2\nflow 1 2 start x stop 10 rate 1 size 5\n", ScenarioSyntaxError, 2),
        ("piconet P1 master 1 slaves 2\n\nmigrate 2 to P7 at 5\n", ScenarioSemanticError, 3),
        ("param num_nodes 5\npiconet P1 master 1 slaves 2\n", ScenarioSemanticError, 2),
        ("param routing DSDV\npiconet P1 master 1 slaves 2\n", ScenarioSemanticError, 1),
        ("param warp 9\npiconet P1 master 1 slaves 2\n", ScenarioSemanticError, 1),
        ("piconet P1 master 1 slaves 2\npiconet P2 master 3 slaves 4\n", ScenarioSemanticError, 2),
        ("piconet P1 master 1 slaves 2\npiconet P2 master 1 slaves 3\n", ScenarioSemanticError, 2),
    ],
)
def test_rejections_carry_line_numbers(text, err, line):
    with pytest.raises(err) as exc:
        parse_scenario(text)
    assert exc.value.line == line


def test_comments_and_blank_lines():
    sc = parse_scenario("# hello\n\npiconet P1 master 0 slaves 1   # trailing\n")
    assert sc.lines == [3]


ids = st.integers(0, 60)


@st.composite
def scenarios(draw):
    nodes = draw(st.lists(ids, min_size=2, max_size=12, unique=True))
    lines = []
    if draw(st.booleans()):
        lines.append(f"param num_nodes {len(nodes)}")
    if draw(st.booleans()):
        lines.append(f"param route_lifetime_ms {draw(st.integers(1, 9000))}")
    # a chain of two-node piconets keeps it connected
    for i in range(len(nodes) - 1):
        lines.append(f"piconet Q{i} master {nodes[i]} slaves {nodes[i + 1]}")
    for _ in range(draw(st.integers(0, 3))):
        a, b = draw(st.lists(st.sampled_from(nodes), min_size=2, max_size=2, unique=True))
        start = draw(st.integers(0, 500))
        rate = draw(st.sampled_from(["1", "2.5", "40"]))
        lines.append(f"flow {a} {b} start {start} stop {start + draw(st.integers(1, 500))} "
                     f"rate {rate} size {draw(st.integers(0, 339))}")
    if len(nodes) > 2 and draw(st.booleans()):
        lines.append(f"migrate {nodes[-1]} to Q0 at {draw(st.integers(0, 900))}")
    if draw(st.booleans()):
        lines.append(f"static {nodes[0]} dest {nodes[-1]} via {nodes[1]} at 0")
    if draw(st.booleans()):
        lines.append(f"leave {nodes[1]} from Q0 at 700")
    return "\n".join(lines) + "\n"


@settings(max_examples=80)
@given(scenarios())
def test_round_trip(text):
    sc = parse_scenario(text)
    again = parse_scenario(format_scenario(sc))
    assert again == sc
    assert format_scenario(again) == format_scenario(sc)


def test_builtins_round_trip():
    for text in BUILTINS.values():
        sc = parse_scenario(text)
        assert parse_scenario(format_scenario(sc)) == sc


def test_builtin_run_writes_five_files(tmp_path):
    assert main(["--scenario", "paper-scatternet", "--seed", "42", "--out", str(tmp_path)]) == EXIT_OK
    assert sorted(os.listdir(tmp_path)) == sorted(OUTPUT_FILES)
    assert (tmp_path / "delay.csv").read_text().startswith("time_ms,value\n")
    trace = (tmp_path / "trace.log").read_text().splitlines()
    assert trace[0].startswith("t=") and " node=" in trace[0] and " ev=" in trace[0]
    summary = (tmp_path / "summary.txt").read_text()
    assert "sent " in summary and "average_delay_ms" in summary


def test_identical_invocations_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["--seed", "7", "--out", str(out), "--until", "1500"]) == EXIT_OK
    for name in OUTPUT_FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_unwritable_out_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--scenario", "fig3-aodv", "--out", str(blocker / "sub")]) == EXIT_IO


def test_missing_scenario_file(tmp_path):
    assert main(["--scenario", str(tmp_path / "nope.txt"), "--out", str(tmp_path)]) == EXIT_IO


def test_bad_scenario_file(tmp_path):
    p = tmp_path / "bad.scn"
    p.write_text("piconet P1 master 1 slaves 2,3,4,5,6,7,8,9\n")
    assert main(["--scenario", str(p), "--out", str(tmp_path / "o")]) == EXIT_SCENARIO


def test_runtime_scenario_error_exit(tmp_path):
    sc = parse_scenario("piconet P1 master 0 slaves 1\nmigrate 1 to P1 at 5\n")
    assert run(sc, 1, tmp_path, until=20) == EXIT_SCENARIO
    assert (tmp_path / "summary.txt").read_text().count("error ") == 1


def test_scenario_file_from_disk(tmp_path):
    p = tmp_path / "two.scn"
    p.write_text(TWO_NODE)
    assert main(["--scenario", str(p), "--out", str(tmp_path / "o"), "--until", "200", "--interval", "50"]) == EXIT_OK
    rows = (tmp_path / "o" / "throughput.csv").read_text().splitlines()
    assert rows[0] == "time_ms,value" and rows[1].startswith("0,") and rows[2].startswith("50,")
    assert sum(int(r.split(",")[1]) for r in rows[1:]) == 1


def test_bad_interval_flag(tmp_path):
    assert main(["--interval", "0", "--out", str(tmp_path)]) == EXIT_SCENARIO
