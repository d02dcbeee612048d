// Thin typed client for the review service endpoints.

import type { Endpoints, Verdict } from "./ctr.js";

export interface CaseSummary {
    case_id: string;
    status: string;
    ctr: number | null;
    category: string | null;
    review_state: "pending" | "reviewed";
    n_reviews: number;
}

export interface CaseListPage {
    cases: CaseSummary[];
    page: number;
    page_size: number;
    total: number;
}

export interface ReviewRecord {
    case_id: string;
    reviewer: string;
    verdict: Verdict;
    request_id: string;
    timestamp: string;
    adjusted_endpoints?: Endpoints;
    recomputed_ctr?: number;
    note?: string;
}

export interface CasePayload {
    case_id: string;
    status: "measured" | "unmeasurable";
    ctr?: number;
    mrd_px?: number;
    mld_px?: number;
    id_px?: number;
    midline_x?: number;
    category?: string;
    detection?: boolean;
    flags?: string[];
    endpoints?: Endpoints;
    reason?: string;
    review_state: "pending" | "reviewed";
    reviews: ReviewRecord[];
    dataset_label: string;
    has_image: boolean;
}

export interface SummaryRow {
    category: string;
    correct: number;
    incorrect: number;
    accuracy_pct: number | null;
}

export interface Summary {
    rows: SummaryRow[];
    reviewed: number;
    pending: number;
}

async function asJson<T>(resp: Response): Promise<T> {
    if (!resp.ok) {
        let detail = `${resp.status}`;
        try {
            const body = (await resp.json()) as { error?: string };
            if (body.error) detail = `${resp.status}: ${body.error}`;
        } catch {
            // body was not JSON; keep the status code
        }
        throw new Error(detail);
    }
    return (await resp.json()) as T;
}

export class ReviewApi {
    constructor(private base: string = "") {}

    listCases(filter: "all" | "pending" | "reviewed", page = 1): Promise<CaseListPage> {
        return fetch(`${this.base}/api/cases?filter=${filter}&page=${page}`).then(
            (r) => asJson<CaseListPage>(r),
        );
    }

    getCase(caseId: string): Promise<CasePayload> {
        return fetch(`${this.base}/api/cases/${caseId}`).then((r) =>
            asJson<CasePayload>(r),
        );
    }

    imageUrl(caseId: string): string {
        return `${this.base}/api/cases/${caseId}/image`;
    }

    async fetchImageBytes(caseId: string): Promise<ArrayBuffer> {
        const resp = await fetch(this.imageUrl(caseId));
        if (!resp.ok) throw new Error(`image fetch failed: ${resp.status}`);
        return resp.arrayBuffer();
    }

    submitReview(
        caseId: string,
        verdict: Verdict,
        options: { reviewer: string; endpoints?: Endpoints; note?: string },
    ): Promise<ReviewRecord> {
        const payload = {
            request_id: crypto.randomUUID(),
            reviewer: options.reviewer,
            verdict,
            ...(options.endpoints ? { endpoints: options.endpoints } : {}),
            ...(options.note ? { note: options.note } : {}),
        };
        return fetch(`${this.base}/api/cases/${caseId}/review`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(payload),
        }).then((r) => asJson<ReviewRecord>(r));
    }

    summary(): Promise<Summary> {
        return fetch(`${this.base}/api/summary`).then((r) => asJson<Summary>(r));
    }
}
