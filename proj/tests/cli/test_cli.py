#!/usr/bin/env python3
"""End-to-end checks of the dynreg command-line tool.

Usage: test_cli.py <dynreg binary> <report schema> <configs dir> <scratch dir>
"""
import csv
import json
import os
import shutil
import subprocess
import sys

import jsonschema

BINARY, SCHEMA_PATH, CONFIGS, SCRATCH = sys.argv[1:5]
SCHEMA = json.load(open(SCHEMA_PATH))
failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(args, env_extra=None):
    env = dict(os.environ)
    env.pop("DYNREG_OUTPUT_DIR", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([BINARY] + args, capture_output=True, text=True, env=env)


def load_report(out_dir, sub):
    path = os.path.join(out_dir, sub + "_report.json")
    with open(path) as f:
        rep = json.load(f)
    try:
        jsonschema.validate(rep, SCHEMA)
        check(True, f"{sub} report in {os.path.basename(out_dir)} validates")
    except jsonschema.ValidationError as e:
        check(False, f"{sub} report in {os.path.basename(out_dir)} validates: {e.message}")
    return rep


def check_csvs(out_dir):
    for name in sorted(os.listdir(out_dir)):
        if not name.endswith(".csv"):
            continue
        with open(os.path.join(out_dir, name)) as f:
            rows = list(csv.reader(f))
        header_ok = bool(rows) and all(cell and not _is_number(cell) for cell in rows[0])
        check(header_ok, f"{name} has a header row")


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def cfg(name):
    return os.path.join(CONFIGS, name)


def out(name):
    return os.path.join(SCRATCH, name)


shutil.rmtree(SCRATCH, ignore_errors=True)
os.makedirs(SCRATCH)

# every subcommand runs and writes a valid report
runs = [
    ("moments", cfg("e11_perturbed.json"), []),
    ("integrate", cfg("e11_perturbed.json"), []),
    ("classify", cfg("identity.json"), []),
    ("appendix", cfg("e11_perturbed.json"), []),
    ("gs", cfg("gs_positive.json"), []),
    ("verify", cfg("gs_negative.json"), []),
    ("report", cfg("gs_negative.json"), []),
]
for sub, config, extra in runs:
    d = out(sub)
    p = run([sub, "--config", config, "--out", d] + extra)
    check(p.returncode == 0, f"{sub} exits 0 (stderr: {p.stderr.strip()})")
    if p.returncode == 0:
        load_report(d, sub)
        check_csvs(d)

# identity is differentiable at the origin
rep = json.load(open(os.path.join(out("classify"), "classify_report.json")))
cls = rep["result"]["verdict"]["classification"]
check(cls == "DifferentiableAtOrigin", f"identity classifies as DifferentiableAtOrigin (got {cls})")

# convergent Cesari example separates the three conditions
d = out("cesari")
p = run(["gs", "--config", cfg("cesari.json"), "--example", "cesari-convergent", "--out", d])
check(p.returncode == 0, "gs cesari-convergent exits 0")
if p.returncode == 0:
    ind = load_report(d, "gs")["result"]["independence"]
    triple = (ind["asym_constant"]["verdict"], ind["uniformly_stable"]["verdict"], ind["square_dini"]["verdict"])
    check(triple == ("EvidenceYes", "EvidenceUnstable", "Converges"), f"cesari independence triple {triple}")

# invalid configuration is a usage error naming the field
p = run(["classify", "--config", cfg("bad_tol.json"), "--out", out("bad")])
check(p.returncode == 2, f"bad_tol exits 2 (got {p.returncode})")
check("budget.tol" in p.stderr, "bad_tol stderr names budget.tol")

# missing config file is a usage error
p = run(["classify", "--config", cfg("does_not_exist.json"), "--out", out("missing")])
check(p.returncode == 2, f"missing config exits 2 (got {p.returncode})")


# reports are deterministic apart from run_info
def stripped(path):
    rep = json.load(open(path))
    rep.pop("run_info")
    return json.dumps(rep, sort_keys=True)


for sub, config in [("classify", cfg("identity.json")), ("moments", cfg("e11_perturbed.json"))]:
    a, b = out(f"det_{sub}_a"), out(f"det_{sub}_b")
    run([sub, "--config", config, "--out", a])
    run([sub, "--config", config, "--out", b])
    ra, rb = os.path.join(a, f"{sub}_report.json"), os.path.join(b, f"{sub}_report.json")
    check(stripped(ra) == stripped(rb), f"{sub} report is deterministic")

# output directory from the environment
env_dir = out("from_env")
p = run(["classify", "--config", cfg("identity.json")], {"DYNREG_OUTPUT_DIR": env_dir})
check(p.returncode == 0 and os.path.exists(os.path.join(env_dir, "classify_report.json")),
      "DYNREG_OUTPUT_DIR selects the output directory")

# --out takes precedence over the environment
flag_dir = out("from_flag")
p = run(["classify", "--config", cfg("identity.json"), "--out", flag_dir], {"DYNREG_OUTPUT_DIR": out("unused")})
check(os.path.exists(os.path.join(flag_dir, "classify_report.json")) and not os.path.exists(out("unused")),
      "--out overrides DYNREG_OUTPUT_DIR")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
