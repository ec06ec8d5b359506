#!/usr/bin/env python3
"""Validate documents written by the radmark binary against docs/schemas.

Usage: check_schemas.py <radmark-binary> <schema-dir> <registry.json>

Runs synth -> ingest -> predict -> evaluate, starts `serve` on an ephemeral
port, posts a correction batch, finalizes and exports, then validates every
emitted JSON document. Exits non-zero on the first invalid document.
"""

import json
import pathlib
import re
import subprocess
import sys
import tempfile
import urllib.request

import jsonschema
from referencing import Registry, Resource


def run(*args):
    subprocess.run([str(a) for a in args], check=True, stdout=subprocess.DEVNULL)


def call(base, path, body=None):
    req = urllib.request.Request(base + path, method="POST" if body is not None else "GET")
    if body is not None:
        req.data = json.dumps(body).encode()
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req, timeout=30) as r:
        return json.loads(r.read())


def main():
    binary, schema_dir, registry_file = map(pathlib.Path, sys.argv[1:4])
    resources = []
    for p in schema_dir.glob("*.schema.json"):
        doc = json.loads(p.read_text())
        resources.append((p.name, Resource.from_contents(doc)))
        resources.append((doc["$id"], Resource.from_contents(doc)))
    registry = Registry().with_resources(resources)

    checked = 0

    def check(schema, doc, what):
        nonlocal checked
        s = {"$ref": schema} if "#" in schema else json.loads((schema_dir / schema).read_text())
        try:
            jsonschema.Draft202012Validator(s, registry=registry).validate(doc)
        except jsonschema.ValidationError as e:
            raise SystemExit(f"{what}: {e.message} at {list(e.absolute_path)}")
        checked += 1

    check("registry.schema.json", json.loads(registry_file.read_text()), registry_file)

    with tempfile.TemporaryDirectory() as tmp:
        t = pathlib.Path(tmp)
        run(binary, "synth", "--n", "3", "--seed", "5", "--out", t / "raw", "--width", "320", "--height", "256")
        run(binary, "synth", "--n", "1", "--seed", "6", "--out", t / "raw_u", "--uncalibrated")
        run(binary, "ingest", t / "raw" / "dicom", t / "raw" / "annotations", "--store", t / "store")
        run(binary, "predict", "--store", t / "store", "--out", t / "store" / "predictions", "--drop", "A01_r,P01_l")
        run(binary, "evaluate", t / "store" / "predictions", t / "store", "--out", t / "report")
        run(binary, "ingest", t / "raw_u" / "dicom", t / "raw_u" / "annotations", "--store", t / "store_u")
        run(binary, "predict", "--store", t / "store_u", "--out", t / "pred_u")
        for p in sorted((t / "pred_u").glob("*.json")):
            check("prediction.schema.json", json.loads(p.read_text()), p)
        for p in sorted((t / "raw" / "annotations").glob("*.json")) + sorted((t / "raw_u" / "annotations").glob("*.json")):
            check("annotation.schema.json", json.loads(p.read_text()), p)
        for p in sorted((t / "store" / "predictions").glob("*.json")):
            check("prediction.schema.json", json.loads(p.read_text()), p)
        check("report.schema.json", json.loads((t / "report" / "report.json").read_text()), "report")

        cfg = {"host": "127.0.0.1", "port": 0, "data_root": str(t / "store"), "model_side": 256, "threads": 2}
        check("service_config.schema.json", cfg, "config")
        (t / "serve.json").write_text(json.dumps(cfg))
        server = subprocess.Popen([str(binary), "serve", "--config", str(t / "serve.json")],
                                  stdout=subprocess.PIPE, text=True)
        try:
            line = server.stdout.readline()
            m = re.search(r"http://[^:]+:(\d+)/api", line)
            if not m:
                raise SystemExit("serve did not report its port: " + line)
            base = f"http://127.0.0.1:{m.group(1)}"
            image = call(base, "/api/images")["images"][0]["image_id"]
            pred = call(base, f"/api/images/{image}/predictions")
            check("prediction.schema.json", pred, "served prediction")
            batch = [{"code": lm["code"], "kind": "accepted"} for lm in pred["landmarks"]]
            batch += [{"code": mk["code"], "kind": "accepted"} for mk in pred["masks"]]
            moved = pred["landmarks"][0]
            batch[0] = {"code": moved["code"], "kind": "moved",
                        "geometry": {"type": "point", "coordinates": [moved["x"] + 1.5, moved["y"] - 2.0]}}
            batch += [{"code": c, "kind": "marked_missing"} for c in pred["missing"]]
            request = {"base_revision": 0, "reviewer": "schema-check", "corrections": batch}
            check("review_record.schema.json#/$defs/corrections_request", request, "corrections request")
            r = call(base, f"/api/images/{image}/corrections", request)
            assert r["revision"] == 1 and r["unresolved"] == [], r
            call(base, f"/api/images/{image}/finalize", {"base_revision": 1})
            check("review_record.schema.json", call(base, f"/api/images/{image}/record"), "record")
            check("review_record.schema.json", call(base, f"/api/images/{image}/revisions/1"), "revision 1")
            check("pool_manifest.schema.json", call(base, "/api/export/training-pool", {}), "manifest")
        finally:
            server.terminate()
            server.wait(timeout=30)
        for p in sorted((t / "store" / "review").rglob("rev-*.json")):
            check("review_record.schema.json", json.loads(p.read_text()), p)
        for p in sorted((t / "store" / "pool" / "annotations").glob("*.json")):
            check("annotation.schema.json", json.loads(p.read_text()), p)

    print(f"schema check: {checked} documents valid")


if __name__ == "__main__":
    main()
