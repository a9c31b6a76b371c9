import copy
import json

import numpy as np
import pytest

from encbel import cli
from encbel.generate import random_loop_network, random_polytree
from encbel.io import (
    DocumentError,
    dumps,
    load_network,
    network_from_dict,
    network_to_dict,
    save_network,
)
from encbel.massfn import MassFunction
from encbel.network import propagate_polytree


@pytest.fixture
def example3_doc(example3_paths):
    with open(example3_paths[0], encoding="utf-8") as fh:
        return json.load(fh)


def test_load_save_load_is_byte_stable(example3, tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_network(example3, p1)
    save_network(load_network(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


@pytest.mark.parametrize("seed", range(10))
def test_random_networks_roundtrip(seed, tmp_path):
    rng = np.random.default_rng(seed)
    net = random_polytree(rng) if seed % 2 else random_loop_network(rng, "2c")
    text = dumps(network_to_dict(net))
    again = dumps(network_to_dict(network_from_dict(json.loads(text))))
    assert text == again
    back = network_from_dict(json.loads(text))
    for k, f in net.families.items():
        assert all(a.max_abs_diff(b) < 1e-11 for a, b in zip(f.entries, back.families[k].entries))


def _corrupt(doc, path, value):
    doc = copy.deepcopy(doc)
    target = doc
    for key in path[:-1]:
        target = target[key]
    target[path[-1]] = value
    return doc


@pytest.mark.parametrize("path,value,message", [
    (("edges", 0, "table", "a1", 0, "mass"), 0.8, "sum to"),
    (("edges", 0, "table", "a1", 0, "focal"), ["?"], "unknown label"),
    (("edges", 0, "parent"), "Q", "unknown variable"),
    (("edges", 0, "table", "a1", 0, "mass"), -0.1, "invalid mass"),
    (("format_version",), 7, "unsupported"),
    (("variables", 1, "frame"), ["+", "+"], "distinct"),
])
def test_structural_errors_are_rejected(example3_doc, path, value, message):
    with pytest.raises(DocumentError, match=message):
        network_from_dict(_corrupt(example3_doc, path, value))


def test_missing_column_is_rejected(example3_doc):
    doc = copy.deepcopy(example3_doc)
    del doc["edges"][0]["table"]["a2"]
    with pytest.raises(DocumentError, match="no column"):
        network_from_dict(doc)


def test_error_names_the_field(example3_doc):
    doc = _corrupt(example3_doc, ("edges", 2, "table", "a4", 1, "mass"), 0.5)
    with pytest.raises(DocumentError, match=r"edges\[2\]\.table\.a4"):
        network_from_dict(doc)


def test_json_syntax_error_has_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "format_version": 1,\n  oops\n}\n')
    with pytest.raises(DocumentError, match="line 3"):
        load_network(p)


# -- CLI ----------------------------------------------------------------------------

def test_cli_validate(example3_paths, capsys):
    assert cli.main(["validate", example3_paths[0]]) == 0
    out = capsys.readouterr().out
    assert "Φ_X={a3,a4,a5}" in out
    assert "Φ_Y={a1,a5}" in out
    assert "Φ_Z={a1,a2,a3}" in out


def test_cli_validate_rejects_bad_column(example3_doc, tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(_corrupt(example3_doc, ("edges", 0, "table", "a1", 0, "mass"), 0.8)))
    assert cli.main(["validate", str(p)]) == cli.EXIT_INVALID
    assert "sum to" in capsys.readouterr().err


def test_cli_query_partition_prints_steps(example3_paths, capsys):
    net, ev = example3_paths
    assert cli.main(["query", net, "--evidence", ev, "--target", "A", "--method", "partition"]) == 0
    out = capsys.readouterr().out
    assert "{a1,s1}     0.240000000" in out
    assert "{s3}        0.540000000" in out
    assert "BEL_A (method partition)" in out


def test_cli_query_output_is_deterministic(example3_paths, capsys):
    net, ev = example3_paths
    outs = []
    for _ in range(2):
        cli.main(["query", net, "--evidence", ev, "--target", "A"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_cli_oracle_and_auto_agree(example3_paths, capsys):
    net, ev = example3_paths
    cli.main(["query", net, "--evidence", ev, "--target", "A", "--method", "oracle"])
    oracle_rows = capsys.readouterr().out.splitlines()[1:]
    cli.main(["query", net, "--evidence", ev, "--target", "A", "--method", "auto"])
    auto_rows = capsys.readouterr().out.splitlines()[1:]
    assert oracle_rows == auto_rows


def test_cli_fallback_is_announced(example3_paths, capsys):
    net, ev = example3_paths
    assert cli.main(["query", net, "--evidence", ev, "--target", "X", "--method", "partition"]) == 0
    err = capsys.readouterr().err
    assert "falling back to polytree" in err


def test_cli_polytree_falls_back_to_merged(tmp_path, capsys):
    p = tmp_path / "loop.json"
    from encbel.io import save_network as save
    save(random_loop_network(np.random.default_rng(0), "2a"), p)
    assert cli.main(["query", str(p), "--target", "A", "--method", "polytree"]) == 0
    cap = capsys.readouterr()
    assert "falling back to merged" in cap.err
    assert "method merged" in cap.out


def test_cli_normalize(tmp_path, capsys):
    from encbel.network import EvidentialNetwork
    net = EvidentialNetwork()
    net.add_variable("A", ["a", "b"])
    net.add_variable("B", ["c", "d"])
    net.add_edge("A", "B", {"a": {(): .5, "c": .5}, "b": {"c": 1}})
    p = tmp_path / "n.json"
    save_network(net, p)
    assert cli.main(["query", str(p), "--target", "B", "--normalize"]) == 0
    out = capsys.readouterr().out
    assert "normalized" in out and "{}" not in out


def test_cli_vacuous_network(tmp_path, capsys):
    from encbel.network import EvidentialNetwork
    from encbel.massfn import FULL
    net = EvidentialNetwork()
    for n in "ABC":
        net.add_variable(n, ["0", "1"])
    net.add_edge("A", "B", {"0": {FULL: 1}, "1": {FULL: 1}})
    net.add_edge("B", "C", {"0": {FULL: 1}, "1": {FULL: 1}})
    p = tmp_path / "v.json"
    save_network(net, p)
    for t in "ABC":
        assert cli.main(["query", str(p), "--target", t]) == 0
        rows = capsys.readouterr().out.splitlines()[2:]
        assert rows == ["{0,1}  1.000000000  1.000000000  1.000000000  1.000000000"]


def test_cli_oracle_check_bundled(example3_paths, capsys):
    net, ev = example3_paths
    assert cli.main(["oracle-check", net, "--evidence", ev]) == 0
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_cli_oracle_check_detects_corruption(example3_paths, capsys, monkeypatch):
    net, ev = example3_paths
    real = cli.propagate_polytree

    def corrupted(n, targets=None):
        out = real(n, targets)
        x = out["X"]
        out["X"] = MassFunction(x.scope, {x.scope.full: 1.0})
        return out

    monkeypatch.setattr(cli, "propagate_polytree", corrupted)
    assert cli.main(["oracle-check", net, "--evidence", ev]) == cli.EXIT_MISMATCH
    out = capsys.readouterr().out
    assert "polytree  X" in out and "FAIL" in out


def test_cli_oracle_trials_are_reproducible(capsys):
    assert cli.main(["oracle-check", "--trials", "12", "--seed", "42"]) == 0
    first = capsys.readouterr().out
    cli.main(["oracle-check", "--trials", "12", "--seed", "42"])
    assert capsys.readouterr().out == first
    assert "12 passed, 0 failed, 0 skipped (seed 42)" in first


def test_cli_resource_cap_exit_code(example3_paths, monkeypatch, capsys):
    net, ev = example3_paths
    monkeypatch.setenv("ENCBEL_MAX_CONFIGS", "16")
    assert cli.main(["query", net, "--evidence", ev, "--target", "A", "--method", "oracle"]) == cli.EXIT_CAP
    assert "resource cap" in capsys.readouterr().err


def test_cli_trial_cap_is_not_fatal(monkeypatch, capsys):
    monkeypatch.setenv("ENCBEL_MAX_CONFIGS", "20")
    status = cli.main(["oracle-check", "--trials", "6", "--seed", "1"])
    out = capsys.readouterr().out
    assert status == 0
    assert "SKIP resource cap" in out


def test_cli_example3_paths(capsys):
    assert cli.main(["example3"]) == 0
    out = capsys.readouterr().out
    assert "example3.json" in out and "example3_evidence.json" in out


def test_marginals_survive_roundtrip(example3, tmp_path):
    p = tmp_path / "e.json"
    save_network(example3, p)
    a = propagate_polytree(example3)["A"]
    b = propagate_polytree(load_network(p))["A"]
    assert a.max_abs_diff(b) < 1e-12
