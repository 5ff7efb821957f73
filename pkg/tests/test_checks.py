import json

from heatflux import checks


def test_registry_has_all_checks():
    for name in ("riccati", "explicit_m1", "equilibria", "gamma_star", "regime_table",
                 "exponents", "conjugacy", "identities", "invariants", "horizon"):
        assert name in checks.REGISTRY


def test_exception_counts_as_failure(monkeypatch):
    def boom(tol_scale=1.0):
        raise RuntimeError("kaput")

    monkeypatch.setitem(checks.REGISTRY, "boom", boom)
    (res,) = checks.run_checks(["boom"])
    assert not res.passed and "kaput" in json.dumps(res.to_record())


def test_record_is_json_serializable():
    (res,) = checks.run_checks(["equilibria"])
    rec = json.loads(json.dumps(res.to_record()))
    assert rec["passed"] is True and rec["name"] == "equilibria"
