"""Human review of pipeline measurements over HTTP.

Reviewers accept, adjust, or reject each case's measurements. Verdicts are
appended to a newline-delimited JSON log; replaying the log reconstructs
the full service state, and a torn final line (crash mid-write) is
discarded on load. For adjustments the server recomputes MRD/MLD/ID from
the submitted endpoints' x-spans and derives the CTR itself; any
client-side CTR is ignored.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .evaluation import NEGATIVE, POSITIVE, UNKNOWN, round_pct
from .errors import (
    IncompleteAdjustmentError,
    ResultsNotLoadedError,
    UnknownCaseError,
    ValidationError,
)

class DuplicateRequestError(ValidationError):
    """Same request id replayed with a different body."""


VERDICT_ACCEPT = "Accept"
VERDICT_ADJUST = "Adjust"
VERDICT_REJECT = "Reject"
VERDICTS = {VERDICT_ACCEPT, VERDICT_ADJUST, VERDICT_REJECT}

SEGMENT_KEYS = ("mrd", "mld", "id")

FILTER_ALL = "all"
FILTER_PENDING = "pending"
FILTER_REVIEWED = "reviewed"


def compute_adjusted(endpoints: dict) -> dict:
    """Lengths and CTR from six endpoints; spans are absolute x-distances."""
    spans = {}
    for key in SEGMENT_KEYS:
        seg = endpoints.get(key)
        if not isinstance(seg, dict) or "a" not in seg or "b" not in seg:
            raise IncompleteAdjustmentError(f"missing endpoints for {key!r}")
        try:
            ax, bx = float(seg["a"]["x"]), float(seg["b"]["x"])
        except (KeyError, TypeError, ValueError) as exc:
            raise IncompleteAdjustmentError(f"malformed endpoints for {key!r}") from exc
        spans[key] = abs(bx - ax)
    if spans["id"] == 0:
        raise ValidationError("ID endpoints span zero width")
    ctr = (spans["mrd"] + spans["mld"]) / spans["id"]
    return {
        "mrd_px": spans["mrd"],
        "mld_px": spans["mld"],
        "id_px": spans["id"],
        "ctr": ctr,
    }


@dataclass
class ReviewRecord:
    case_id: str
    reviewer: str
    verdict: str
    request_id: str
    timestamp: str
    adjusted_endpoints: dict | None = None
    recomputed_ctr: float | None = None
    note: str | None = None

    def to_obj(self) -> dict:
        obj = {
            "case_id": self.case_id,
            "reviewer": self.reviewer,
            "verdict": self.verdict,
            "request_id": self.request_id,
            "timestamp": self.timestamp,
        }
        if self.adjusted_endpoints is not None:
            obj["adjusted_endpoints"] = self.adjusted_endpoints
        if self.recomputed_ctr is not None:
            obj["recomputed_ctr"] = self.recomputed_ctr
        if self.note is not None:
            obj["note"] = self.note
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "ReviewRecord":
        return cls(
            case_id=obj["case_id"],
            reviewer=obj["reviewer"],
            verdict=obj["verdict"],
            request_id=obj["request_id"],
            timestamp=obj["timestamp"],
            adjusted_endpoints=obj.get("adjusted_endpoints"),
            recomputed_ctr=obj.get("recomputed_ctr"),
            note=obj.get("note"),
        )


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class ReviewStore:
    """Case results plus the append-only review log."""

    results_dir: str
    log_path: str
    image_paths: dict[str, str] = field(default_factory=dict)
    labels: dict[str, str] = field(default_factory=dict)
    cases: dict[str, dict] = field(default_factory=dict)
    reviews: dict[str, list[ReviewRecord]] = field(default_factory=dict)
    request_index: dict[str, tuple[str, ReviewRecord]] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _loaded: bool = False

    @classmethod
    def open(cls, results_dir, manifest_cases=None, log_path=None) -> "ReviewStore":
        results_dir = os.fspath(results_dir)
        store = cls(
            results_dir=results_dir,
            log_path=log_path or os.path.join(results_dir, "reviews.ndjson"),
        )
        if manifest_cases:
            for rec in manifest_cases:
                store.image_paths[rec.case_id] = rec.image_path
                store.labels[rec.case_id] = rec.dataset_label
        store._load_cases()
        store._replay_log()
        store._loaded = True
        return store

    def _load_cases(self):
        cases_dir = os.path.join(self.results_dir, "cases")
        if not os.path.isdir(cases_dir):
            raise ResultsNotLoadedError(f"no case results under {cases_dir}")
        for name in sorted(os.listdir(cases_dir)):
            if not name.endswith(".json"):
                continue
            with open(os.path.join(cases_dir, name)) as fh:
                obj = json.load(fh)
            self.cases[obj["case_id"]] = obj

    def _replay_log(self):
        if not os.path.exists(self.log_path):
            return
        keep: list[str] = []
        with open(self.log_path, "r") as fh:
            for line in fh:
                stripped = line.strip()
                if not stripped:
                    continue
                if not line.endswith("\n"):
                    break  # torn final line from a crash mid-append
                try:
                    obj = json.loads(stripped)
                except json.JSONDecodeError:
                    break
                self._index(ReviewRecord.from_obj(obj), obj.get("_body_key"))
                keep.append(stripped)
        # truncate any torn tail so the log stays replayable
        with open(self.log_path, "w") as fh:
            for line in keep:
                fh.write(line + "\n")

    def _index(self, record: ReviewRecord, body_key: str | None):
        self.reviews.setdefault(record.case_id, []).append(record)
        self.request_index[record.request_id] = (body_key or "", record)

    def _append(self, record: ReviewRecord, body_key: str):
        obj = record.to_obj()
        obj["_body_key"] = body_key
        with open(self.log_path, "a") as fh:
            fh.write(_canonical(obj) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- queries ----------------------------------------------------------

    def _require_loaded(self):
        if not self._loaded:
            raise ResultsNotLoadedError("store not loaded")

    def review_state(self, case_id: str) -> str:
        return FILTER_REVIEWED if self.reviews.get(case_id) else FILTER_PENDING

    def list_cases(self, filter_: str = FILTER_ALL, page: int = 1, page_size: int = 50) -> dict:
        self._require_loaded()
        if filter_ not in (FILTER_ALL, FILTER_PENDING, FILTER_REVIEWED):
            raise ValidationError(f"unknown filter {filter_!r}")
        if page < 1 or page_size < 1:
            raise ValidationError("page and page_size must be >= 1")
        ids = sorted(self.cases)
        if filter_ != FILTER_ALL:
            ids = [i for i in ids if self.review_state(i) == filter_]
        start = (page - 1) * page_size
        chunk = ids[start:start + page_size]
        summaries = []
        for cid in chunk:
            case = self.cases[cid]
            summaries.append(
                {
                    "case_id": cid,
                    "status": case["status"],
                    "ctr": case.get("ctr"),
                    "category": case.get("category"),
                    "review_state": self.review_state(cid),
                    "n_reviews": len(self.reviews.get(cid, [])),
                }
            )
        return {
            "cases": summaries,
            "page": page,
            "page_size": page_size,
            "total": len(ids),
        }

    def get_case(self, case_id: str) -> dict:
        self._require_loaded()
        if case_id not in self.cases:
            raise UnknownCaseError(case_id)
        case = dict(self.cases[case_id])
        case["review_state"] = self.review_state(case_id)
        case["reviews"] = [r.to_obj() for r in self.reviews.get(case_id, [])]
        case["dataset_label"] = self.labels.get(case_id, UNKNOWN)
        case["has_image"] = case_id in self.image_paths
        return case

    def image_path(self, case_id: str) -> str:
        if case_id not in self.cases or case_id not in self.image_paths:
            raise UnknownCaseError(case_id)
        return self.image_paths[case_id]

    # -- mutations ---------------------------------------------------------

    def submit_review(
        self,
        case_id: str,
        verdict: str,
        reviewer: str = "",
        request_id: str = "",
        endpoints: dict | None = None,
        note: str | None = None,
    ) -> tuple[ReviewRecord, bool]:
        """Returns (record, created). Replaying the same request_id with an
        identical body returns the stored record; a different body is a
        conflict."""
        self._require_loaded()
        if case_id not in self.cases:
            raise UnknownCaseError(case_id)
        if verdict not in VERDICTS:
            raise ValidationError(f"verdict must be one of {sorted(VERDICTS)}")
        if not request_id:
            raise ValidationError("request_id is required")
        if verdict == VERDICT_ACCEPT and endpoints:
            raise ValidationError("Accept must not carry adjusted endpoints")
        if verdict == VERDICT_ADJUST and not endpoints:
            raise IncompleteAdjustmentError("Adjust requires all six endpoints")

        body_key = _canonical(
            {
                "case_id": case_id,
                "verdict": verdict,
                "reviewer": reviewer,
                "endpoints": endpoints,
                "note": note,
            }
        )
        with self._lock:
            existing = self.request_index.get(request_id)
            if existing is not None:
                stored_key, record = existing
                if stored_key == body_key:
                    return record, False
                raise DuplicateRequestError(
                    f"request_id {request_id!r} already used with a different body"
                )

            adjusted = None
            recomputed = None
            if verdict == VERDICT_ADJUST:
                computed = compute_adjusted(endpoints)
                adjusted = endpoints
                recomputed = computed["ctr"]

            record = ReviewRecord(
                case_id=case_id,
                reviewer=reviewer,
                verdict=verdict,
                request_id=request_id,
                timestamp=datetime.now(timezone.utc).isoformat(),
                adjusted_endpoints=adjusted,
                recomputed_ctr=recomputed,
                note=note,
            )
            self._append(record, body_key)
            self._index(record, body_key)
            return record, True

    # -- summary -----------------------------------------------------------

    def latest_reviews(self) -> dict[str, ReviewRecord]:
        return {cid: records[-1] for cid, records in self.reviews.items() if records}

    def summary(self) -> dict:
        self._require_loaded()
        counts: dict[str, list[int]] = {}
        for cid, record in sorted(self.latest_reviews().items()):
            label = self.labels.get(cid, UNKNOWN)
            pair = counts.setdefault(label, [0, 0])
            if record.verdict == VERDICT_ACCEPT:
                pair[0] += 1
            else:
                pair[1] += 1
        rows = []
        for label in (POSITIVE, NEGATIVE, UNKNOWN):
            if label in counts:
                correct, incorrect = counts[label]
                rows.append(format_summary_row(label, correct, incorrect))
        total_correct = sum(c for c, _ in counts.values())
        total_incorrect = sum(i for _, i in counts.values())
        rows.append(format_summary_row("total", total_correct, total_incorrect))
        return {
            "rows": rows,
            "reviewed": total_correct + total_incorrect,
            "pending": len(self.cases) - len(self.latest_reviews()),
        }


def format_summary_row(category: str, correct: int, incorrect: int) -> dict:
    """One acceptance-table row; percentage absent when nothing reviewed."""
    total = correct + incorrect
    accuracy = round_pct(correct / total) if total else None
    return {
        "category": category,
        "correct": correct,
        "incorrect": incorrect,
        "accuracy_pct": accuracy,
    }


# -- HTTP layer -------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    store: ReviewStore = None  # set by make_server
    ui_dir: str | None = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, obj, status: int = 200):
        body = json.dumps(obj, sort_keys=True).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error(self, status: int, message: str):
        self._send_json({"error": message}, status=status)

    def _send_file(self, path: str, content_type: str):
        try:
            with open(path, "rb") as fh:
                body = fh.read()
        except OSError:
            self._send_error(404, "file not found")
            return
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            if parts[:2] == ["api", "cases"] and len(parts) == 2:
                qs = parse_qs(url.query)
                self._send_json(
                    self.store.list_cases(
                        filter_=qs.get("filter", [FILTER_ALL])[0],
                        page=int(qs.get("page", ["1"])[0]),
                        page_size=int(qs.get("page_size", ["50"])[0]),
                    )
                )
            elif parts[:2] == ["api", "cases"] and len(parts) == 3:
                self._send_json(self.store.get_case(parts[2]))
            elif parts[:2] == ["api", "cases"] and len(parts) == 4 and parts[3] == "image":
                path = self.store.image_path(parts[2])
                ctype = "image/png" if path.lower().endswith(".png") else "image/x-portable-graymap"
                self._send_file(path, ctype)
            elif parts == ["api", "summary"]:
                self._send_json(self.store.summary())
            elif not parts or not parts[0] == "api":
                self._serve_static(parts)
            else:
                self._send_error(404, "unknown endpoint")
        except UnknownCaseError:
            self._send_error(404, "unknown case")
        except (ValidationError, ValueError) as exc:
            self._send_error(400, str(exc))

    def _serve_static(self, parts: list[str]):
        if self.ui_dir is None:
            self._send_json({"service": "ctrkit review", "ui": "not bundled"})
            return
        rel = "/".join(parts) if parts else "index.html"
        path = os.path.normpath(os.path.join(self.ui_dir, rel))
        if not path.startswith(os.path.abspath(self.ui_dir)):
            self._send_error(404, "not found")
            return
        if os.path.isdir(path):
            path = os.path.join(path, "index.html")
        ctype = {
            ".html": "text/html",
            ".js": "text/javascript",
            ".css": "text/css",
            ".map": "application/json",
        }.get(os.path.splitext(path)[1], "application/octet-stream")
        self._send_file(path, ctype)

    def do_POST(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if not (parts[:2] == ["api", "cases"] and len(parts) == 4 and parts[3] == "review"):
            self._send_error(404, "unknown endpoint")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            self._send_error(400, "body must be JSON")
            return
        try:
            record, created = self.store.submit_review(
                case_id=parts[2],
                verdict=payload.get("verdict", ""),
                reviewer=payload.get("reviewer", ""),
                request_id=payload.get("request_id", ""),
                endpoints=payload.get("endpoints"),
                note=payload.get("note"),
            )
        except UnknownCaseError:
            self._send_error(404, "unknown case")
            return
        except DuplicateRequestError as exc:
            self._send_error(409, str(exc))
            return
        except (IncompleteAdjustmentError, ValidationError) as exc:
            self._send_error(400, str(exc))
            return
        self._send_json(record.to_obj(), status=201 if created else 200)


def make_server(store: ReviewStore, host: str = "127.0.0.1", port: int = 0,
                ui_dir: str | None = None) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {
        "store": store,
        "ui_dir": os.path.abspath(ui_dir) if ui_dir else None,
    })
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(store: ReviewStore, host: str, port: int, ui_dir: str | None = None):
    server = make_server(store, host, port, ui_dir)
    bound = server.server_address
    print(f"review service listening on http://{bound[0]}:{bound[1]}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
