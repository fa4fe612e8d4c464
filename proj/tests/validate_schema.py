#!/usr/bin/env python3
"""Runs both CLI sweeps on a small link and validates the emitted results."""

import csv
import json
import pathlib
import subprocess
import sys

import jsonschema

CONFIG = {
    "link": {"spans": 2, "step_km": 2.0, "pmd_ps_sqrt_km": 0.0},
    "tx": {"samples_per_symbol": 2, "laser_linewidth_hz": 0},
    "symbols": {"preamble": 2048, "guard": 64, "train": 2048, "test": 4096},
    "techniques": ["cdc_only", "conv", "conv_am", "ls", "fnn"],
    "powers_dbm": [0, 4],
    "seeds": [1],
    "triplets": {"window": 5, "target_count": {"9": 41, "5": 13}, "quadrature": {"z_steps_per_span": 10}},
    "fnn": {"hidden": [4], "epochs": 2},
    "prune": {"rounds": 2, "fine_tune_epochs": 1},
    "tradeoff": {"windows": [9, 5], "clusters": [2, 4], "sparsities": [0.5]},
}

CSV_HEADER = ["technique", "power_dbm", "q_db", "q_gain_db", "mults_per_symbol", "seed", "config_hash"]


def check(out: pathlib.Path, name: str, schema: dict) -> int:
    doc = json.loads((out / f"{name}.json").read_text())
    jsonschema.validate(doc, schema)
    rows = doc["rows"]
    assert doc["kind"] == name, doc["kind"]
    assert all(r["config_hash"] == doc["config_hash"] for r in rows)
    assert all(r["status"] == "ok" for r in rows), [r["error"] for r in rows if r["status"] != "ok"]
    lines = (out / f"{name}.csv").read_text().splitlines()
    assert lines[0].startswith("# software_version="), lines[0]
    table = list(csv.reader(lines[1:]))
    assert table[0] == CSV_HEADER, table[0]
    assert len(table) - 1 == len(rows), (len(table) - 1, len(rows))
    for cells, row in zip(table[1:], rows):
        assert cells[0] == row["technique"]
        assert float(cells[2]) == row["q_db"]
        assert int(cells[4]) == row["mults_per_symbol"]
    return len(rows)


def main() -> int:
    cli, schema_path, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    work.mkdir(parents=True, exist_ok=True)
    config = work / "config.json"
    config.write_text(json.dumps(CONFIG))
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    out = work / "out"
    for cmd in ("sweep-power", "sweep-tradeoff"):
        subprocess.run([cli, "--config", str(config), "--out", str(out), cmd], check=True)
    n_power = check(out, "power_sweep", schema)
    n_trade = check(out, "tradeoff", schema)
    print(f"schema ok: {n_power} power rows, {n_trade} tradeoff rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
