"""End-to-end checks of the command-line tool."""
import csv
import json
import pathlib
import subprocess
import sys

exe, work = sys.argv[1], pathlib.Path(sys.argv[2])
work.mkdir(parents=True, exist_ok=True)
failures = []


def run(name, *args):
    out = work / name
    proc = subprocess.run([exe, *args, "--out", str(out)], capture_output=True, text=True)
    return proc, out


def expect(name, cond, detail=""):
    print(f"{name}: {'pass' if cond else 'fail'} {detail}")
    if not cond:
        failures.append(name)


proc, out = run("constants", "constants", "--q", "2", "--H", "0.5")
report = json.loads((out / "report.json").read_text())
expect("constants_sigma_sq", proc.returncode == 0 and abs(report["results"]["sigma_sq"] - 2.0) < 1e-12,
       f"sigma_sq={report['results']['sigma_sq']}")
expect("constants_seed_echo", report["config"]["seed"] == 1)
expect("constants_version", report["version"].startswith("0.1.0"))

proc, out = run("identities", "identities", "--seed", "7")
report = json.loads((out / "report.json").read_text())
core = {"duality", "product_formula", "commutation", "skorohod_covariance"}
worst = max(c["statistic"] for c in report["checks"] if c["name"] in core)
expect("identities_exit", proc.returncode == 0, f"worst={worst:.3g}")
expect("identities_tolerance", worst <= 1e-9 and core <= {c["name"] for c in report["checks"]})

proc, out = run("variation", "variation", "--q", "2", "--H", "0.3", "--n", "64", "--m", "1", "--seed", "1",
                "--decompose")
rows = list(csv.DictReader(open(out / "samples.csv")))
row = rows[0]
parts = float(row["main"]) + float(row["middle_1"]) + float(row["remainder"])
expect("variation_exit", proc.returncode == 0)
expect("variation_decomposition_sum", len(rows) == 1 and abs(parts - float(row["g_n"])) <= 1e-8,
       f"g_n={row['g_n']} parts={parts}")

# Same config and seed give identical reports outside the meta block.
repeat = ("variation", "--q", "3", "--H", "0.3", "--n", "128", "--m", "50", "--seed", "5")
_, a = run("repeat", *repeat)
ra = json.loads((a / "report.json").read_text())
csv_a = (a / "samples.csv").read_bytes()
_, b = run("repeat", *repeat)
rb = json.loads((b / "report.json").read_text())
ra.pop("meta")
rb.pop("meta")
expect("report_determinism", json.dumps(ra) == json.dumps(rb))
expect("csv_determinism", csv_a == (b / "samples.csv").read_bytes())

cfg = work / "config.json"
cfg.write_text(json.dumps({"q": 2, "H": 0.3, "n": 64, "m": 4, "seed": 3}))
proc, out = run("config_override", "variation", "--config", str(cfg), "--q", "3")
report = json.loads((out / "report.json").read_text())
expect("flags_override_config", proc.returncode == 0 and report["config"]["q"] == 3 and report["config"]["seed"] == 3)

bad = work / "bad.json"
bad.write_text(json.dumps({"q": 2, "unknown_key": 1}))
proc, _ = run("bad_config", "variation", "--config", str(bad))
expect("invalid_config_exit_2", proc.returncode == 2, proc.stderr.strip())
proc, _ = run("bad_hurst", "constants", "--H", "1.5")
expect("invalid_hurst_exit_2", proc.returncode == 2, proc.stderr.strip())

proc, out = run("paths", "fbm", "--H", "0.3", "--n", "256", "--m", "200", "--seed", "2")
expect("fbm_export", proc.returncode == 0 and (out / "paths.fbm").exists())

sys.exit(1 if failures else 0)
