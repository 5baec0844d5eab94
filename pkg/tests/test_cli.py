import numpy as np
import pytest

from fmreg import adapter_io
from fmreg.cli import main
from fmreg.store import store_read


def run(argv):
    return main(argv)


def gen_args(out, split="train", **over):
    base = {"seed": "3", "classes": "6", "templates": "8", "dim": "16",
            "n_per_class": "6", "sigma_template": "0.2", "sigma_image": "0.2"}
    base.update({k: str(v) for k, v in over.items()})
    return ["gen", "--seed", base["seed"], "--classes", base["classes"],
            "--templates", base["templates"], "--dim", base["dim"],
            "--n-per-class", base["n_per_class"],
            "--sigma-template", base["sigma_template"],
            "--sigma-image", base["sigma_image"],
            "--split", split, "--out", str(out)]


def test_gen_writes_valid_store(tmp_path, capsys):
    out = tmp_path / "w.fmes"
    assert run(gen_args(out)) == 0
    store = store_read(out)
    assert store.n_templates == 8
    assert store.n_classes == 6


def test_gen_default_templates_is_60(tmp_path):
    out = tmp_path / "w.fmes"
    assert run(["gen", "--classes", "3", "--dim", "8", "--n-per-class", "2",
                "--out", str(out)]) == 0
    assert store_read(out).n_templates == 60


def test_gen_missing_out_is_usage_error(capsys):
    assert run(["gen", "--seed", "1"]) == 2


def test_gen_byte_identical(tmp_path):
    a, b = tmp_path / "a.fmes", tmp_path / "b.fmes"
    run(gen_args(a))
    run(gen_args(b))
    assert a.read_bytes() == b.read_bytes()


def _train(tmp_path, store, **over):
    report = tmp_path / over.pop("report", "report.csv")
    adapter = tmp_path / over.pop("adapter", "adapter.fmad")
    argv = ["train", "--store-in", str(store), "--report-out", str(report),
            "--adapter-out", str(adapter), "--epochs", "2", "--shots", "3",
            "--seed", "3"]
    for k, v in over.items():
        argv += [f"--{k.replace('_', '-')}", str(v)]
    return run(argv), report, adapter


def test_train_and_eval_pipeline(tmp_path, capsys):
    store = tmp_path / "train.fmes"
    test_store = tmp_path / "test.fmes"
    run(gen_args(store))
    run(gen_args(test_store, split="test"))
    code, report, adapter = _train(tmp_path, store)
    assert code == 0
    lines = report.read_text().strip().splitlines()
    assert lines[0] == "epoch,ce,cl,total,train_acc"
    assert len(lines) == 3
    state = adapter_io.adapter_read(adapter)
    assert len(state.base_indices) == 3

    out = tmp_path / "eval.csv"
    assert run(["eval", "--store-in", str(test_store), "--adapter-in",
                str(adapter), "--out", str(out)]) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "dataset,base,novel,hm"
    assert rows[1].startswith("synthetic,")


def test_train_writes_json_report(tmp_path):
    import json

    store = tmp_path / "train.fmes"
    run(gen_args(store))
    code, report, _ = _train(tmp_path, store)
    assert code == 0
    payload = json.loads((tmp_path / (report.name + ".json")).read_text())
    assert len(payload["epochs"]) == 2
    assert {"epoch", "ce", "cl", "total", "train_acc"} <= set(payload["epochs"][0])


def test_eval_threads_deterministic(tmp_path):
    store = tmp_path / "tr.fmes"
    te = tmp_path / "te.fmes"
    run(gen_args(store))
    run(gen_args(te, split="test"))
    _, _, adapter = _train(tmp_path, store)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["eval", "--store-in", str(te), "--adapter-in", str(adapter),
                "--out", str(a)]) == 0
    assert run(["eval", "--store-in", str(te), "--adapter-in", str(adapter),
                "--out", str(b), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_train_beta_zero_usage_error(tmp_path):
    store = tmp_path / "train.fmes"
    run(gen_args(store))
    code, _, _ = _train(tmp_path, store, beta=0)
    assert code == 2


def test_train_gamma_zero_reports_cl(tmp_path):
    store = tmp_path / "train.fmes"
    run(gen_args(store))
    code, report, _ = _train(tmp_path, store, gamma=0)
    assert code == 0
    header = report.read_text().splitlines()[0]
    assert "cl" in header.split(",")


def test_train_missing_store_runtime_error(tmp_path):
    code, _, _ = _train(tmp_path, tmp_path / "missing.fmes")
    assert code == 1


def test_config_file_precedence(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("classes = 4  # comment\ndim = 8\n")
    out = tmp_path / "w.fmes"
    # flag overrides file, file overrides default
    assert run(["gen", "--config", str(cfgfile), "--dim", "12",
                "--n-per-class", "2", "--out", str(out)]) == 0
    store = store_read(out)
    assert store.n_classes == 4
    assert store.dim == 12


def test_config_file_unknown_key(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("bogus = 1\n")
    assert run(["gen", "--config", str(cfgfile), "--out", str(tmp_path / "w.fmes")]) == 2


def test_gradcheck_passes(capsys):
    assert run(["gradcheck", "--instances", "5", "--seed", "2"]) == 0
    out = capsys.readouterr().out
    assert out.count("max relative error") == 3


def test_gradcheck_negative_control():
    assert run(["gradcheck", "--instances", "2", "--seed", "2", "--corrupt"]) == 1


def test_gradcheck_eps_sweep(capsys):
    assert run(["gradcheck", "--instances", "2", "--seed", "2",
                "--eps", "1e-4,1e-5"]) == 0
    out = capsys.readouterr().out
    assert "eps=0.0001" in out and "eps=1e-05" in out


def test_scores_dump(tmp_path):
    store = tmp_path / "train.fmes"
    run(gen_args(store))
    out = tmp_path / "scores.csv"
    assert run(["scores", "--store-in", str(store), "--sample", "0",
                "--beta", "2", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("template,class_0")
    assert len(lines) == 8 + 3  # T rows + header + two selection rows
    assert lines[-2].startswith("designated,")
    assert lines[-1].startswith("non_designated,")
    # 17-significant-digit scores survive a float64 round trip
    val = float(lines[1].split(",")[1])
    assert np.isfinite(val)


def test_scores_bad_sample_index(tmp_path):
    store = tmp_path / "train.fmes"
    run(gen_args(store))
    assert run(["scores", "--store-in", str(store), "--sample", "9999"]) == 2


def test_pipeline_byte_identical(tmp_path):
    outputs = []
    for tag in ("one", "two"):
        d = tmp_path / tag
        d.mkdir()
        tr, te = d / "tr.fmes", d / "te.fmes"
        run(gen_args(tr))
        run(gen_args(te, split="test"))
        code, report, adapter = _train(d, tr)
        assert code == 0
        ev = d / "eval.csv"
        assert run(["eval", "--store-in", str(te), "--adapter-in", str(adapter),
                    "--out", str(ev)]) == 0
        outputs.append((tr.read_bytes(), te.read_bytes(), report.read_bytes(),
                        adapter.read_bytes(), ev.read_bytes()))
    assert outputs[0] == outputs[1]
