import csv
import json
from pathlib import Path

import pytest

from stocon import (
    Marking,
    StochasticLog,
    deterministic_trace,
    parse_log,
    serialize_log,
    serialize_net,
)
from stocon.cli import main

from _generators import ab_model, sequence_model, table2_trace

DATA = Path(__file__).parent / "data"


@pytest.fixture
def workspace(tmp_path):
    net_path = tmp_path / "model.json"
    net_path.write_bytes(serialize_net(sequence_model(["A", "C", "D", "F"])))
    log_path = tmp_path / "log.json"
    log_path.write_bytes((DATA / "table2_trace.json").read_bytes())
    det_path = tmp_path / "det.json"
    det_log = StochasticLog(
        tuple(
            deterministic_trace(f"c{i}", ["A", "C", "D", "F", "A", "C", "D", "F"][: 6 + i % 3])
            for i in range(5)
        )
    )
    det_path.write_bytes(serialize_log(det_log))
    return tmp_path, net_path, log_path, det_path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def test_align_writes_csv(workspace, capsys):
    tmp, net, log, _ = workspace
    out = tmp / "result.csv"
    moves = tmp / "moves.tsv"
    code = main(
        ["align", "--net", str(net), "--log", str(log), "--out", str(out), "--moves-out", str(moves)]
    )
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 1
    assert rows[0]["case_id"] == "1"
    assert set(rows[0]) == {
        "case_id", "profile", "total_cost", "n_moves", "n_sync", "n_log_moves",
        "n_model_moves", "explored_nodes", "wall_time_ms",
    }
    assert float(rows[0]["total_cost"]) > 0
    dump = moves.read_text()
    assert dump.startswith("# case 1\n")
    assert "sync\t" in dump


def test_align_profile_dominance(workspace):
    tmp, net, log, _ = workspace
    out_st = tmp / "st.csv"
    out_lb = tmp / "lb.csv"
    assert main(["align", "--net", str(net), "--log", str(log), "--out", str(out_st)]) == 0
    assert (
        main(
            ["align", "--net", str(net), "--log", str(log), "--profile", "lower-bound",
             "--out", str(out_lb)]
        )
        == 0
    )
    for st, lb in zip(read_csv(out_st), read_csv(out_lb)):
        assert float(lb["total_cost"]) <= float(st["total_cost"]) + 1e-12


def test_align_partial_failure_exit_code(workspace):
    tmp, _, _, _ = workspace
    # a model whose final marking is unreachable fails every trace
    from stocon import SystemNet

    dead = SystemNet(["q0", "q1"], [], [], Marking({"q0": 1}), Marking({"q1": 1}))
    net = tmp / "dead.json"
    net.write_bytes(serialize_net(dead))
    ok_log = tmp / "one.json"
    ok_log.write_bytes(serialize_log(StochasticLog((table2_trace(),))))
    out = tmp / "result.csv"
    assert main(["align", "--net", str(net), "--log", str(ok_log), "--out", str(out)]) == 2
    assert read_csv(out) == []


def test_align_missing_file_is_fatal(workspace):
    tmp, net, _, _ = workspace
    assert main(["align", "--net", str(net), "--log", str(tmp / "nope.json"), "--out", str(tmp / "x.csv")]) == 1


PNML = """<?xml version="1.0"?>
<pnml><net id="n"><page id="p">
  <place id="s0"><initialMarking><text>1</text></initialMarking></place>
  <place id="s1"/>
  <transition id="a"><name><text>A</text></name></transition>
  <arc id="f1" source="s0" target="a"/><arc id="f2" source="a" target="s1"/>
</page></net></pnml>
"""


def test_align_pnml_requires_final_marking(workspace, tmp_path):
    tmp, _, log, _ = workspace
    pnml = tmp_path / "net.pnml"
    pnml.write_text(PNML)
    out = tmp_path / "out.csv"
    assert main(["align", "--net", str(pnml), "--log", str(log), "--out", str(out)]) == 1
    code = main(
        ["align", "--net", str(pnml), "--log", str(log), "--out", str(out),
         "--final-marking", '{"s1": 1}']
    )
    assert code == 0  # net parses once the marking is supplied
    rows = read_csv(out)
    assert float(rows[0]["total_cost"]) > 0  # three events need log moves


def test_perturb_reproducible_and_sidecar(workspace):
    tmp, _, _, det = workspace
    out_a, out_b = tmp / "a.json", tmp / "b.json"
    args = ["perturb", "--log", str(det), "--nt", "2", "--pf", "0.95", "--tp", "1.0",
            "--seed", "7", "--out"]
    assert main(args + [str(out_a)]) == 0
    assert main(args + [str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    sidecar = json.loads((tmp / "a.json.provenance.json").read_text())
    assert sidecar["config"]["seed"] == 7
    assert len(sidecar["traces"]) == 5
    perturbed = parse_log(out_a.read_bytes())
    assert all(e.size == 2 for t in perturbed.traces for e in t.events)


def test_perturb_tp_zero_lifts_to_probability_one(workspace):
    tmp, _, _, det = workspace
    out = tmp / "zero.json"
    assert main(["perturb", "--log", str(det), "--nt", "2", "--pf", "0.95", "--tp", "0",
                 "--seed", "1", "--out", str(out)]) == 0
    assert parse_log(out.read_bytes()) == parse_log(det.read_bytes())


def test_perturb_rejects_stochastic_input(workspace):
    tmp, _, log, _ = workspace
    assert main(["perturb", "--log", str(log), "--nt", "2", "--pf", "0.9", "--tp", "0.5",
                 "--seed", "1", "--out", str(tmp / "x.json")]) == 1


def test_perturb_mode_all(workspace):
    tmp, _, _, det = workspace
    out = tmp / "all.json"
    assert main(["perturb", "--log", str(det), "--nt", "2", "--pf", "0.75", "--tp", "0.5",
                 "--mode", "all", "--fraction", "0.3", "--seed", "3", "--out", str(out)]) == 0
    sidecar = json.loads((tmp / "all.json.provenance.json").read_text())
    record = sidecar["traces"][0]
    assert record["relabeled"] and record["swapped"] and record["duplicated"]


def test_sweep_produces_figure_csvs(workspace):
    tmp, net, _, det = workspace
    out_dir = tmp / "sweep"
    code = main(
        ["sweep", "--net", str(net), "--log", str(det), "--seed", "5",
         "--pf", "0.55,0.95", "--pf-grid", "0.5,0.7,0.9", "--nt", "2",
         "--tp-step", "0.5", "--out-dir", str(out_dir)]
    )
    assert code == 0
    fig4 = read_csv(out_dir / "fig4.csv")
    grid = [r for r in fig4 if r["series"] == "stochastic"]
    refs = [r for r in fig4 if r["series"].startswith("reference")]
    assert len(grid) == 3  # 1 nt x 3 grid points
    assert len(refs) == 1  # mode none: original reference only
    assert refs[0]["p_f"] == "1"
    fig5 = read_csv(out_dir / "fig5.csv")
    # 3 tp values x (2 stochastic series + 1 lower bound)
    assert len(fig5) == 9
    assert {r["series"] for r in fig5} == {"stochastic", "lower-bound"}
    fig6 = read_csv(out_dir / "fig6.csv")
    assert {r["bucket"] for r in fig6} == {"0-9"}
    selfcheck = read_csv(out_dir / "selfcheck.csv")
    assert all(r["status"] == "PASS" for r in selfcheck)
    assert read_csv(out_dir / "errors.csv") == []


def test_sweep_deterministic_across_threads(workspace, monkeypatch):
    tmp, net, _, det = workspace
    blobs = {}
    for threads in ("1", "8"):
        monkeypatch.setenv("STOCON_THREADS", threads)
        out_dir = tmp / f"sweep{threads}"
        assert main(
            ["sweep", "--net", str(net), "--log", str(det), "--seed", "5",
             "--pf", "0.75", "--pf-grid", "0.6,0.9", "--nt", "2", "--tp-step", "0.5",
             "--out-dir", str(out_dir)]
        ) == 0
        blobs[threads] = b"".join(
            (out_dir / name).read_bytes()
            for name in ("fig4.csv", "fig5.csv", "fig6.csv", "errors.csv", "selfcheck.csv")
        )
    monkeypatch.delenv("STOCON_THREADS")
    assert blobs["1"] == blobs["8"]


def test_oracle_command(workspace, capsys):
    tmp, net, log, _ = workspace
    assert main(["oracle", "--net", str(net), "--log", str(log)]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "search=" in out and "brute=" in out


def test_plot_command(workspace):
    tmp, net, _, det = workspace
    out_dir = tmp / "sweep"
    main(
        ["sweep", "--net", str(net), "--log", str(det), "--seed", "5", "--pf", "0.75",
         "--pf-grid", "0.6,0.9", "--nt", "2", "--tp-step", "0.5", "--out-dir", str(out_dir)]
    )
    svg = tmp / "fig5.svg"
    assert main(["plot", "--csv", str(out_dir / "fig5.csv"), "--out", str(svg)]) == 0
    text = svg.read_text()
    assert text.startswith("<svg")
    assert "<polyline" in text and "</svg>" in text


def test_import_xes_command(tmp_path):
    xes = tmp_path / "log.xes"
    xes.write_text(
        """<log xmlns="http://www.xes-standard.org/">
        <trace><string key="concept:name" value="1"/>
        <event><string key="concept:name" value="A"/></event>
        <event><string key="concept:name" value="B"/></event>
        </trace></log>"""
    )
    out = tmp_path / "log.json"
    assert main(["import-xes", "--xes", str(xes), "--out", str(out)]) == 0
    log = parse_log(out.read_bytes())
    assert [e.distribution for e in log.traces[0].events] == [{"A": 1.0}, {"B": 1.0}]
