"""Runs every subcommand on small configs and validates each JSON report
against schemas/report.schema.json."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
schema = json.loads((root / "schemas" / "report.schema.json").read_text())
validator = jsonschema.Draft202012Validator(schema)

# short ladder so the whole sweep stays quick
small = {
    "schema_version": 1,
    "preset": "laminate-p2",
    "ladder": [0.25, 0.125, 0.0625],
}
identity = json.loads((root / "configs" / "identity-linear.json").read_text())

failures = 0
with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    for name, doc in (("laminate", small), ("identity", identity)):
        cfg = tmp / f"{name}.json"
        cfg.write_text(json.dumps(doc))
        for sub in ("cell", "effective", "fine", "homogenized", "corrector-study", "verify"):
            out = tmp / name / sub
            proc = subprocess.run([cli, sub, "--config", str(cfg), "--out", str(out)],
                                  capture_output=True, text=True)
            if proc.returncode != 0:
                print(f"FAIL {name}/{sub}: exit {proc.returncode}\n{proc.stderr}")
                failures += 1
                continue
            reports = sorted(out.glob("*.json"))
            if not reports:
                print(f"FAIL {name}/{sub}: no JSON report written")
                failures += 1
            for rep in reports:
                errors = list(validator.iter_errors(json.loads(rep.read_text())))
                if errors:
                    failures += 1
                    for e in errors:
                        print(f"FAIL {name}/{sub}/{rep.name}: {'/'.join(map(str, e.path))}: {e.message}")
                else:
                    print(f"ok   {name}/{sub}/{rep.name}")

sys.exit(1 if failures else 0)
