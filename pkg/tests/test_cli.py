import json

import pytest
import yaml

from thresholds import cli
from thresholds.experiments import REGISTRY


def write(tmp_path, doc, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return str(p)


def base(kind="lr_second_moment", **params):
    return {"schema_version": 1, "kind": kind, "seed": 11, "params": params}


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert len(REGISTRY) >= 16
    for name, kind in REGISTRY.items():
        assert f"{name}  [{kind.family}]" in out
    assert set(cli.list_experiments()) == set(REGISTRY)


@pytest.mark.parametrize("kind", sorted(REGISTRY))
def test_every_kind_rejects_missing_seed(tmp_path, kind):
    doc = base(kind)
    del doc["seed"]
    assert cli.main(["validate", write(tmp_path, doc)]) == cli.EXIT_CONFIG


def test_config_errors(tmp_path, capsys):
    bad = [
        dict(base(), params={"nope": 1}),
        dict(base(), params={"n_grid": "many"}),
        dict(base(), kind="unknown"),
        dict(base(), schema_version=2),
        dict(base(), seed=-1),
        dict(base(), seed=True),
        dict(base(), extra=1),
    ]
    for i, doc in enumerate(bad):
        assert cli.main(["validate", write(tmp_path, doc, f"b{i}.yaml")]) == cli.EXIT_CONFIG
    (tmp_path / "broken.yaml").write_text("kind: [")
    assert cli.main(["run", str(tmp_path / "broken.yaml")]) == cli.EXIT_CONFIG
    assert cli.main(["run", str(tmp_path / "missing.yaml")]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_validate_ok(tmp_path, capsys):
    assert cli.main(["validate", write(tmp_path, base())]) == 0
    assert capsys.readouterr().out.startswith("ok lr_second_moment ")


def test_seed_override_in_output(tmp_path):
    cfg = write(tmp_path, base(n_grid=[20], lam_grid=[0.5]))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o"), "--seed-override", "99"]) == 0
    doc = json.loads((tmp_path / "o" / "lr_second_moment.json").read_text())
    assert doc["seed"] == 99
    lines = (tmp_path / "o" / "lr_second_moment.csv").read_text().splitlines()
    assert lines[0].startswith("config_hash,seed,")
    assert all(l.split(",")[:2] == [doc["config_hash"], "99"] for l in lines[1:])


def test_numeric_failure_exit(tmp_path, capsys):
    cfg = write(tmp_path, base("sk_sandwich", small_n=[30], small_draws=1, large_n=50, large_draws=2,
                               slepian_draws=10))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == cli.EXIT_NUMERIC
    assert "numeric failure" in capsys.readouterr().err


def run_bytes(tmp_path, cfg, sub, *extra):
    out = tmp_path / sub
    assert cli.main(["run", cfg, "--out", str(out), *extra]) == 0
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_byte_identical_reruns(tmp_path):
    cfg = write(tmp_path, base("npp_ogp", n=12, draws=10, eps=0.5))
    assert run_bytes(tmp_path, cfg, "a") == run_bytes(tmp_path, cfg, "b")


def test_thread_count_invariance(tmp_path):
    cfg = write(tmp_path, base("needle", n=8, lam_grid=[0.5, 2.0], draws=40, chunks=4))
    one = run_bytes(tmp_path, cfg, "t1", "--threads", "1")
    four = run_bytes(tmp_path, cfg, "t4", "--threads", "4")
    assert one == four


def test_env_threads(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.default_threads() == 3
    monkeypatch.setenv(cli.THREADS_ENV, "x")
    assert cli.default_threads() == 1


def test_config_hash_ignores_output():
    a = cli.check_config(base())
    b = cli.check_config(dict(base(), output="elsewhere"))
    assert cli.config_hash(a) == cli.config_hash(b)
    assert cli.config_hash(a) != cli.config_hash(cli.check_config(base(), seed_override=12))


def test_nonfinite_json():
    text = cli.render_json({"seed": 1, "kind": "k", "schema_version": 1, "params": {}}, "h",
                           {"x": float("inf")}, 0)
    assert json.loads(text)["summary"]["x"] == "inf"
