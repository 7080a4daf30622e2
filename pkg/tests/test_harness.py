import json

import pytest

from causalprod.harness import (
    ALL_BOUNDS,
    TrialConfig,
    parse_bound_set,
    resolve_bound_name,
    run_trial,
    run_trials,
    summarize,
)
from causalprod.products import builtin_spec


def test_bound_name_resolution():
    assert resolve_bound_name("jury_main") == "jury_main_bound"
    assert resolve_bound_name("ell_L") == "ell_L_diagnostics"
    assert parse_bound_set("causal_bound,oracle") == ("causal_bound", "oracle")
    assert parse_bound_set("all") == ALL_BOUNDS
    with pytest.raises(ValueError, match="unknown bound"):
        parse_bound_set("nope")


def test_config_validation():
    with pytest.raises(ValueError):
        TrialConfig(n=1, trials=1, master_seed=0, bound_set=("jury_main_bound",)).validate()
    with pytest.raises(ValueError):
        TrialConfig(n=3, trials=0, master_seed=0).validate()
    with pytest.raises(ValueError):
        TrialConfig(n=3, trials=1, master_seed=0, rank_policy=4).validate()
    with pytest.raises(ValueError):
        TrialConfig(n=3, trials=1, master_seed=0, spec_policy=builtin_spec("jury", 2)).validate()


def test_n2_jury_main_all_equality():
    cfg = TrialConfig(n=2, trials=1000, master_seed=1, spec_policy="jury",
                      bound_set=("jury_main_bound",))
    records, summary = run_trials(cfg)
    assert summary["bounds"]["jury_main_bound"]["equality"] == 1000
    assert not summary["failed"]


def test_hadamard_chain_no_violations():
    cfg = TrialConfig(n=4, trials=500, master_seed=2, spec_policy="hadamard",
                      rank_policy="random", bound_set=("oppenheim_chain",))
    _, summary = run_trials(cfg)
    assert summary["violations"] == 0


def test_random_custom_causal_with_oracles():
    cfg = TrialConfig(n=3, trials=500, master_seed=3, spec_policy="random_custom",
                      bound_set=("causal_bound", "oracle"))
    _, summary = run_trials(cfg)
    assert summary["violations"] == 0
    assert summary["oracle_failures"] == 0
    assert summary["oracles"]["causal_gram"]["pass"] == 500


def test_completeness_notes():
    cfg = TrialConfig(n=3, trials=20, master_seed=4, spec_policy="random_custom",
                      rank_policy="random")
    records, _ = run_trials(cfg)
    for rec in records:
        assert rec.oracles
        for name in cfg.bound_set:
            assert (name in rec.evaluated) != (name in rec.notes), name


def test_determinism_across_workers():
    cfg = TrialConfig(n=4, trials=30, master_seed=5, spec_policy="random_custom",
                      rank_policy="random", regularization_eps=1e-3)
    r1, s1 = run_trials(cfg, workers=1)
    r2, s2 = run_trials(cfg, workers=4)
    dump = lambda rs: json.dumps([r.to_dict() for r in rs], sort_keys=True, default=float)
    assert dump(r1) == dump(r2)
    assert json.dumps(s1, sort_keys=True, default=float) == json.dumps(s2, sort_keys=True, default=float)


def test_regularized_inputs_flagged():
    cfg = TrialConfig(n=3, trials=10, master_seed=6, rank_policy=1,
                      regularization_eps=1e-2, bound_set=("jury_product_bound",))
    records, summary = run_trials(cfg)
    assert all(rec.inputs["regularized"] for rec in records)
    assert summary["regularized_trials"] == 10


def test_summarize_single_and_replay():
    cfg = TrialConfig(n=3, trials=25, master_seed=7, spec_policy="jury",
                      bound_set=("jury_main_bound",))
    records, summary = run_trials(cfg)
    one = summarize(records[:1])
    entry = one["bounds"]["jury_main_bound"]
    assert entry["min_gap"] == entry["median_gap"] == records[0].reports[0].gap
    argmin = summary["bounds"]["jury_main_bound"]["argmin_trial"]
    replay = run_trial(cfg, argmin)
    assert replay.reports[0].gap == summary["bounds"]["jury_main_bound"]["min_gap"]
    with pytest.raises(ValueError):
        summarize([])


def test_violation_persisted(tmp_path, monkeypatch):
    import causalprod.harness as h
    from causalprod.bounds import BoundReport

    monkeypatch.setitem(
        h.EVALUATORS, "hadamard_det_bound",
        lambda a, b, s, e: [BoundReport.compare("hadamard_det_bound", 0.0, 1.0)],
    )
    cfg = TrialConfig(n=2, trials=2, master_seed=8, bound_set=("hadamard_det_bound",))
    _, summary = run_trials(cfg, persist_dir=tmp_path)
    assert summary["failed"] and summary["violations"] == 2
    files = sorted(tmp_path.iterdir())
    assert len(files) == 2
    payload = json.loads(files[0].read_text())
    assert payload["A"]["n"] == 2
