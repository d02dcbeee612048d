"""
Human review workflow
=====================

Spins the review service up on an ephemeral port, walks the pending
queue over its REST API the way the browser UI does - accept one case,
adjust another by moving endpoints - and prints the acceptance summary.
"""

import json
import tempfile
import threading
import urllib.request
import uuid

from ctrkit.pipeline import PipelineConfig, parse_manifest, run_pipeline
from ctrkit.review import ReviewStore, make_server
from ctrkit.synthetic import generate_synthetic_dataset


def get(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return json.loads(resp.read())


def post(base, path, payload):
    req = urllib.request.Request(
        base + path, data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"}, method="POST",
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


with tempfile.TemporaryDirectory() as td:
    generate_synthetic_dataset(3, 64, seed=13, out_dir=f"{td}/data")
    records = parse_manifest(f"{td}/data/manifest.csv")
    run_pipeline(PipelineConfig(out_dir=f"{td}/results", overlays=False), records)

    store = ReviewStore.open(f"{td}/results", manifest_cases=records)
    server = make_server(store, port=0)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    print(f"service on {base}")

    pending = get(base, "/api/cases?filter=pending")
    print(f"{pending['total']} cases pending review")

    first = pending["cases"][0]["case_id"]
    post(base, f"/api/cases/{first}/review",
         {"request_id": str(uuid.uuid4()), "reviewer": "demo", "verdict": "Accept"})
    print(f"{first}: accepted as-is")

    second = pending["cases"][1]["case_id"]
    case = get(base, f"/api/cases/{second}")
    eps = case["endpoints"]
    # nudge the left ID endpoint 4 px outward, as a reviewer dragging a handle
    eps["id"]["a"]["x"] -= 4
    record = post(base, f"/api/cases/{second}/review", {
        "request_id": str(uuid.uuid4()), "reviewer": "demo",
        "verdict": "Adjust", "endpoints": eps,
    })
    print(f"{second}: adjusted, server recomputed CTR = {record['recomputed_ctr']:.4f} "
          f"(was {case['ctr']:.4f})")

    summary = get(base, "/api/summary")
    for row in summary["rows"]:
        pct = row["accuracy_pct"]
        print(f"  {row['category']:>8}: correct {row['correct']}, "
              f"incorrect {row['incorrect']}, accuracy "
              f"{'-' if pct is None else f'{pct}%'}")
    print(f"{summary['pending']} still pending")
    server.shutdown()
