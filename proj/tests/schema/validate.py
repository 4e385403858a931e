"""Validates every JSON document the CLI and the service emit against
schemas/stml.schema.json, driving the real binary.

usage: validate.py <stml binary> <schema file> <corpus dir>
"""

import json
import socket
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request
from pathlib import Path

import jsonschema

STML, SCHEMA, CORPUS = Path(sys.argv[1]), Path(sys.argv[2]), Path(sys.argv[3])
SCRIPT = ["For-LoopFusion", "AugAdditionAssign", "JoinAssignments", "UndoDistribute", "LoopInvCodeMotion"]

schema = json.loads(SCHEMA.read_text())
jsonschema.Draft202012Validator.check_schema(schema)
checked = 0


def validate(doc, name):
    global checked
    sub = {"$schema": schema["$schema"], "$defs": schema["$defs"], "$ref": f"#/$defs/{name}"}
    jsonschema.validate(doc, sub, cls=jsonschema.Draft202012Validator)
    checked += 1
    return doc


def run(*args):
    return subprocess.run([str(STML), *map(str, args)], capture_output=True, text=True, timeout=60)


def check_cli(tmp):
    programs = sorted(CORPUS.glob("*.c"))
    for p in programs:
        r = run("matches", p)
        assert r.returncode == 0, r.stderr
        validate(json.loads(r.stdout), "cli_matches")

        out = tmp / (p.stem + ".greedy.c")
        r = run("transform", p, "--oracle", "greedy", "--out", out)
        assert r.returncode == 0, r.stderr
        validate(json.loads(Path(str(out) + ".report.json").read_text()), "report")

    script = tmp / "script.txt"
    script.write_text("\n".join(SCRIPT) + "\n")
    out = tmp / "scripted.c"
    report = tmp / "scripted.json"
    r = run("transform", CORPUS / "deriv_step0.c", "--oracle", f"scripted:{script}", "--out", out,
            "--report", report)
    assert r.returncode == 0, r.stderr
    rep = validate(json.loads(report.read_text()), "report")
    assert [s["rule"] for s in rep["steps"]] == SCRIPT

    r = run("transform", CORPUS / "deriv_step0.c", "--oracle", f"scripted:{script}", "--budget", "2")
    assert r.returncode == 2, r.returncode

    r = run("transform", tmp / "missing.c")
    assert r.returncode == 1
    assert validate(json.loads(r.stderr), "error")["error"]["kind"] == "FileError"

    bad = tmp / "bad.c"
    bad.write_text("#pragma polca map F v\nx = 1;\n")
    r = run("lower", bad)
    assert r.returncode == 1
    validate(json.loads(r.stderr), "error")
    return out.read_text()


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class Client:
    def __init__(self, base):
        self.base = base

    def call(self, method, path, body=None, expect=200, schema_name=None):
        data = None if body is None else json.dumps(body).encode()
        req = urllib.request.Request(self.base + path, data=data, method=method,
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=30) as resp:
                status, payload = resp.status, resp.read()
        except urllib.error.HTTPError as e:
            status, payload = e.code, e.read()
        doc = json.loads(payload)
        assert status == expect, f"{method} {path}: {status} {doc}"
        validate(doc, "error" if status >= 400 else schema_name)
        return doc


def check_service(cli_code):
    port = free_port()
    proc = subprocess.Popen([str(STML), "serve", "--port", str(port)], stdout=subprocess.DEVNULL,
                            stderr=subprocess.DEVNULL)
    try:
        c = Client(f"http://127.0.0.1:{port}")
        for _ in range(200):
            try:
                c.call("GET", "/health", schema_name="health")
                break
            except (urllib.error.URLError, ConnectionError):
                time.sleep(0.05)
        else:
            raise AssertionError("service did not come up")
        c.call("GET", "/rules", schema_name="rules")

        for p in sorted(CORPUS.glob("*.c")):
            s = c.call("POST", "/session", {"code": p.read_text()}, expect=201, schema_name="session_created")
            sid = s["id"]
            ms = c.call("GET", f"/session/{sid}/matches", schema_name="matches")
            proven = [m for m in ms["matches"] if m["certainty"] == "proven"]
            if proven:
                c.call("POST", f"/session/{sid}/apply", {"match_id": proven[0]["id"]}, schema_name="apply")
                c.call("POST", f"/session/{sid}/apply", {"match_id": proven[0]["id"]}, expect=409)
                c.call("GET", f"/session/{sid}/history", schema_name="history")
                c.call("POST", f"/session/{sid}/undo", schema_name="undo")
            else:
                c.call("POST", f"/session/{sid}/undo", expect=400)
            c.call("GET", f"/session/{sid}/state", schema_name="state")
            c.call("POST", f"/session/{sid}/export", schema_name="export")

        s = c.call("POST", "/session", {"code": (CORPUS / "deriv_step0.c").read_text()}, expect=201,
                   schema_name="session_created")
        sid = s["id"]
        for rule in SCRIPT:
            ms = c.call("GET", f"/session/{sid}/matches", schema_name="matches")
            m = next(m for m in ms["matches"] if m["rule"] == rule and m["certainty"] == "proven")
            c.call("POST", f"/session/{sid}/apply", {"match_id": m["id"]}, schema_name="apply")
        exported = c.call("POST", f"/session/{sid}/export", schema_name="export")
        assert exported["code"] == cli_code, "service export differs from the scripted CLI output"

        unsafe = ("float x[4], c[4], y;\nfor (int i = 0; i < 4; i++)\n  x[i] = g(y);\n"
                  "for (int i = 0; i < 4; i++)\n  c[i] = 1;\n")
        sid = c.call("POST", "/session", {"code": unsafe}, expect=201, schema_name="session_created")["id"]
        ms = c.call("GET", f"/session/{sid}/matches", schema_name="matches")
        m = next(m for m in ms["matches"] if m["certainty"] == "unknown")
        assert c.call("POST", f"/session/{sid}/apply", {"match_id": m["id"]}, expect=400)["error"]["kind"] == \
            "UnsafeApplication"
        c.call("POST", f"/session/{sid}/apply", {"match_id": m["id"], "override": True}, schema_name="apply")

        c.call("GET", "/session/none/state", expect=404)
        c.call("POST", "/session", {"nope": 1}, expect=400)

        lm = (CORPUS / "local_minimum.c").read_text()
        req = validate({"oracle": "lookahead:2", "code": lm}, "oracle_is_final_request")
        assert c.call("POST", "/oracle/is_final", req, schema_name="oracle_is_final")["final"] is False
        cand = validate({"code": lm, "rules": ["AugAdditionAssign"], "rule": "For-LoopFusion", "ordinal": 0},
                        "candidate")
        req = validate({"oracle": "greedy", "candidates": [cand]}, "oracle_select_request")
        assert c.call("POST", "/oracle/select", req, schema_name="oracle_select")["choice"] == 0
        c.call("POST", "/oracle/select", {"oracle": "scripted:x", "candidates": [cand]}, expect=400)
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def main():
    with tempfile.TemporaryDirectory() as d:
        cli_code = check_cli(Path(d))
    check_service(cli_code)
    print(f"{checked} documents schema-valid")


if __name__ == "__main__":
    main()
