"""The whole machine: tree in, certificate out, artifacts re-verified.
=======================================================================

Runs the construction over a two-vertex chain (the second vertex consumes
embedding data derived from the first step's accepted scales), writes the
profile CSVs and the schema-versioned certificate, then re-verifies the
stored artifacts and corrupts one value to show the named-clause failure.
"""

import json
import math
import pathlib
import tempfile

import numpy as np

from plumbric import NiceCoordinateSpec, run_construction, tangent_chain, verify
from plumbric.pipeline import certificate_json, verify_samples

tree = tangent_chain(2, 3)
spec = NiceCoordinateSpec(p=3, q=3, R=math.pi / 4, N=1.0, kappa=0.5)

with tempfile.TemporaryDirectory() as td:
    out = pathlib.Path(td)
    cert = run_construction(tree, spec, out_dir=out)
    print(f"certificate passed: {cert.passed}  (wall time {cert.wall_time_s}s)")
    for i, step in enumerate(cert.steps):
        checks = {c["id"]: c["passed"] for c in step["checks"]}
        print(f"  step {i} (vertex {step['vertex']}, {step['spec']['provenance']}):",
              checks)

    prof = out / "profiles" / "step_0.csv"
    par = out / "profiles" / "step_0.params.json"
    v1 = verify(prof, par)
    v2 = verify(prof, par)
    print("\nre-verification passed:", v1.passed,
          " byte-identical on repeat:", certificate_json(v1) == certificate_json(v2))

    # corrupt the stored end radius by 1e-3 and watch the named clause fail
    rows = prof.read_text().strip().splitlines()
    import io
    data = np.loadtxt(io.StringIO("\n".join(rows[1:])), delimiter=",")
    cols = {name: data[:, k] for k, name in enumerate(rows[0].split(","))}
    cols["f"][-1] += 1e-3
    params = json.loads(par.read_text())
    bad = verify_samples(cols, params, 3, 3)
    failing = [k for k, v in bad.steps[0]["bc_clauses"].items() if not v["passed"]]
    print("after corrupting f(b3):", "passed =", bad.passed, " failing clauses:", failing)
