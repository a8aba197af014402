import json
import math

import pytest

import stx


@pytest.fixture(scope="module")
def world():
    return stx.generate(n_events=60, n_nodes=12, planted=3, pairs=1, noise=0.0, seed=4)


def test_generate_and_graph(world):
    assert len(world.store) == 61
    assert world.target == 60
    assert len(world.important_ids) == 5
    cg = stx.extract_computation_graph(world.store, world.target, hops=2)
    assert len(cg) == 60
    assert world.target not in cg.candidate_ids


def test_metric_functions():
    assert stx.sparsity(20, 100) == 0.8
    assert stx.alpha_fidelity(3.0, 0.0) == stx.ALPHA_FIDELITY_CAP
    assert stx.alpha_fidelity(0.5, 0.5) == 1.0
    assert stx.delta_fidelity(0.3, 0.1) == -stx.delta_fidelity(0.1, 0.3)
    assert stx.accept_probability(1.0, 2.0, 0.5) == 1.0
    assert math.isclose(stx.accept_probability(2.5, 2.0, 0.5), math.exp(-1.0), rel_tol=1e-12)
    with pytest.raises(stx.InvalidArgument):
        stx.accept_probability(1.0, 0.0, 0.0)


def test_planted_explanation_recovers_truth(world):
    oracle = stx.PlantedOracle(world.model)
    cg = stx.extract_computation_graph(world.store, world.target)
    result = stx.explain(oracle, world.store, cg, stx.SearchConfig(size=10, seed=1))
    ids = result.explanation.event_ids
    assert ids == sorted(ids)
    assert result.explanation.report.fid_minus == 0.0
    precision, recall = stx.recovery_score(ids, world.important_ids)
    assert recall == 1.0
    assert len(result.trace) == 1500
    again = stx.explain(oracle, world.store, cg, stx.SearchConfig(size=10, seed=1))
    assert again.explanation.event_ids == ids


def test_python_callable_oracle(world):
    truth = set(world.important_ids)
    task = stx.TaskSpec(stx.TaskKind.ENTITY_REGRESSION, 1)
    calls = []

    def model(included, target):
        calls.append(target)
        return [float(len(truth.intersection(included)))]

    oracle = stx.CallbackOracle(task, model)
    assert not oracle.reentrant
    cg = stx.extract_computation_graph(world.store, world.target)
    result = stx.explain(oracle, world.store, cg, stx.SearchConfig(size=5, stages=2, iterations=300, seed=3))
    assert calls and all(t == world.target for t in calls)
    assert stx.fidelity_minus(oracle, world.store, cg, result.explanation.event_ids) == result.explanation.report.fid_minus


def test_oracle_exception_surfaces_as_oracle_error(world):
    def broken(included, target):
        raise RuntimeError("model crashed")

    oracle = stx.CallbackOracle(stx.TaskSpec(stx.TaskKind.ENTITY_BINARY), broken)
    cg = stx.extract_computation_graph(world.store, world.target)
    with pytest.raises(stx.OracleError, match="model crashed"):
        stx.explain(oracle, world.store, cg, stx.SearchConfig(size=3))


def test_store_from_dicts_and_errors():
    store = stx.EventStore([
        {"id": 0, "src": 1, "dst": 2, "t": 1.0},
        {"id": 1, "src": 2, "dst": None, "t": 2.0},
        {"id": 2, "src": 2, "dst": 3, "t": 3.0},
    ])
    assert store.ids() == [0, 1, 2]
    assert store.event(1)["dst"] is None
    cg = stx.extract_computation_graph(store, 2, hops=1)
    assert cg.candidate_ids == [0, 1]
    with pytest.raises(stx.DataError):
        store.event(7)
    with pytest.raises(stx.InvalidArgument):
        stx.SearchConfig(size=0)


def test_cli_roundtrip(tmp_path):
    data = str(tmp_path / "d.jsonl")
    code, _, err = stx.run_cli(["synth", "--out", data, "--events", "40", "--seed", "2"])
    assert code == 0, err
    store = stx.load_events(data)
    assert len(store) == 41
    truth = stx.read_ground_truth(data + ".truth.json")
    assert truth.target == 40
    code, out, err = stx.run_cli(["explain", "--data", data, "--target", "40", "--size", "5", "--seed", "3"])
    assert code == 0, err
    doc = json.loads(out)
    assert doc["target_event"] == 40 and doc["size"] == len(doc["event_ids"])
    assert stx.run_cli(["explain", "--data", data])[0] == 2
