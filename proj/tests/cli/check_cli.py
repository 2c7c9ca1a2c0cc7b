"""End-to-end checks of the comgrl executable."""
import json
import pathlib
import subprocess
import sys
import tempfile

CLI, FIXTURES, SCHEMAS, VALIDATOR = sys.argv[1:5]
SMALL = ["--set", "pretrain_epochs=4", "--set", "total_epochs=8", "--set", "hidden_dim=8",
         "--set", "heads=2", "--set", "hop_radius=1", "--set", "threshold=0.3"]
SBM = json.dumps({"num_classes": 3, "nodes_per_class": 20, "p_in": 0.3, "p_out": 0.02,
                  "feature_dim": 6, "labels_per_class": 3, "val_size": 10, "seed": 1})


def run(*args, ok=True):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    if ok and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    if not ok and proc.returncode == 0:
        raise AssertionError(f"{args} unexpectedly succeeded")
    return proc


def load(path):
    with open(path) as f:
        return json.load(f)


def without_time(report):
    report = dict(report)
    report.pop("wall_time_seconds")
    report.pop("variant")
    return report


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)

        run("train", "--dataset", f"{FIXTURES}/tiny", "--out", str(tmp / "tiny"), *SMALL)
        report = load(tmp / "tiny" / "seed_0.json")
        assert all(abs(e["loss"]) < float("inf") for e in report["epochs"])
        assert len(report["epochs"]) == 8

        run("train", "--sbm", SBM, "--seeds", "0,1,2,3,4", "--jobs", "2",
            "--out", str(tmp / "five"), *SMALL)
        assert len(load(tmp / "five" / "aggregate.json")["test_acc"]) == 5

        run("ablate", "--sbm", SBM, "--seeds", "0,1", "--out", str(tmp / "ablate"), *SMALL)
        for v in ["full", "no-lgcl", "no-gmsa", "no-pma"]:
            for s in [0, 1]:
                assert (tmp / "ablate" / v / f"seed_{s}.json").exists(), (v, s)

        run("train", "--sbm", SBM, "--seeds", "0", "--disable-pma",
            "--out", str(tmp / "nopma"), *SMALL)
        assert without_time(load(tmp / "nopma" / "seed_0.json")) == \
            without_time(load(tmp / "ablate" / "no-pma" / "seed_0.json"))

        run("noise", "--sbm", SBM, "--seeds", "0", "--lnr", "0.3", "--gnr", "0.1",
            "--out", str(tmp / "noise"), *SMALL)
        noisy = load(tmp / "noise" / "seed_0.json")["noise"]
        assert noisy["lnr"] == 0.3 and noisy["gnr"] == 0.1 and noisy["noisy_edges"] > 0
        run("noise", "--sbm", SBM, "--out", str(tmp / "bad"), *SMALL, ok=False)

        config = tmp / "config.json"
        config.write_text(json.dumps({"sbm": json.loads(SBM), "seeds": [3], "tau": 0.5}))
        run("train", "--config", str(config), "--out", str(tmp / "cfg"), *SMALL)
        r = load(tmp / "cfg" / "seed_3.json")
        assert r["config"]["tau"] == 0.5
        run("train", "--config", str(config), "--set", "tau=0.7", "--out", str(tmp / "cfg2"), *SMALL)
        assert load(tmp / "cfg2" / "seed_3.json")["config"]["tau"] == 0.7

        config.write_text(json.dumps({"sbm": json.loads(SBM), "taux": 0.5}))
        assert "taux" in run("train", "--config", str(config), ok=False).stderr + \
            run("train", "--config", str(config), ok=False).stdout
        run("train", "--sbm", SBM, "--set", "tau=-1", ok=False)
        run("train", "--dataset", str(tmp / "missing"), ok=False)

        run("gen", "--sbm", SBM, "--out", str(tmp / "g1"))
        run("gen", "--sbm", SBM, "--out", str(tmp / "g2"))
        for f in ["edges.txt", "features.txt", "labels.txt", "split.txt"]:
            assert (tmp / "g1" / f).read_bytes() == (tmp / "g2" / f).read_bytes(), f
        run("train", "--dataset", str(tmp / "g1"), "--out", str(tmp / "gen_train"), *SMALL)

        check = subprocess.run([sys.executable, VALIDATOR, SCHEMAS, str(tmp)])
        assert check.returncode == 0
    print("cli checks passed")


if __name__ == "__main__":
    main()
