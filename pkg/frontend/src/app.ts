// Review workstation: radiograph on a canvas, the three measurement
// segments as a draggable SVG overlay, live CTR, and verdict submission.

import { ReviewApi, CasePayload, CaseSummary } from "./api.js";
import {
    Bounds,
    CaseState,
    EndKey,
    Endpoints,
    SEGMENT_KEYS,
    SegmentKey,
    Verdict,
    allowedVerdicts,
    dragEndpoint,
    formatCtr,
    initState,
    nudgeEndpoint,
    resetState,
} from "./ctr.js";
import { drawImageBytes } from "./pgm.js";

const SEGMENT_COLORS: Record<SegmentKey, string> = {
    id: "#e03c3c",
    mrd: "#3c6ce0",
    mld: "#2ca84a",
};

interface HandleRef {
    key: SegmentKey;
    end: EndKey;
}

class App {
    private api = new ReviewApi("");
    private state: CaseState | null = null;
    private payload: CasePayload | null = null;
    private bounds: Bounds = { width: 1, height: 1 };
    private selected: HandleRef | null = null;
    private pending: CaseSummary[] = [];

    private els = {
        list: document.getElementById("case-list") as HTMLElement,
        stage: document.getElementById("stage") as HTMLElement,
        canvas: document.getElementById("image-canvas") as HTMLCanvasElement,
        overlay: document.getElementById("overlay") as unknown as SVGSVGElement,
        banner: document.getElementById("banner") as HTMLElement,
        ctr: document.getElementById("ctr-value") as HTMLElement,
        badge: document.getElementById("category-badge") as HTMLElement,
        flags: document.getElementById("flags") as HTMLElement,
        reviewer: document.getElementById("reviewer") as HTMLInputElement,
        note: document.getElementById("note") as HTMLInputElement,
        accept: document.getElementById("btn-accept") as HTMLButtonElement,
        adjust: document.getElementById("btn-adjust") as HTMLButtonElement,
        reject: document.getElementById("btn-reject") as HTMLButtonElement,
        reset: document.getElementById("btn-reset") as HTMLButtonElement,
        error: document.getElementById("error") as HTMLElement,
        summary: document.getElementById("summary") as HTMLElement,
    };

    async start(): Promise<void> {
        this.els.accept.addEventListener("click", () => this.submit("Accept"));
        this.els.adjust.addEventListener("click", () => this.submit("Adjust"));
        this.els.reject.addEventListener("click", () => this.submit("Reject"));
        this.els.reset.addEventListener("click", () => {
            if (this.state) {
                this.state = resetState(this.state);
                this.renderOverlay();
            }
        });
        document.addEventListener("keydown", (ev) => this.onKey(ev));
        await this.refreshList();
        await this.refreshSummary();
        if (this.pending.length > 0) {
            await this.open(this.pending[0].case_id);
        }
    }

    private async refreshList(): Promise<void> {
        const page = await this.api.listCases("pending");
        this.pending = page.cases;
        this.els.list.replaceChildren();
        for (const summary of page.cases) {
            const item = document.createElement("button");
            item.className = "case-item";
            item.textContent = `${summary.case_id}  ${
                summary.ctr === null || summary.ctr === undefined
                    ? summary.status
                    : summary.ctr.toFixed(3)
            }`;
            item.addEventListener("click", () => void this.open(summary.case_id));
            this.els.list.appendChild(item);
        }
        if (page.cases.length === 0) {
            const done = document.createElement("p");
            done.textContent = "queue empty - all cases reviewed";
            this.els.list.appendChild(done);
        }
    }

    private async refreshSummary(): Promise<void> {
        const summary = await this.api.summary();
        const total = summary.rows.find((r) => r.category === "total");
        this.els.summary.textContent = total
            ? `reviewed ${summary.reviewed} (accepted ${total.correct}, ` +
              `other ${total.incorrect}${
                  total.accuracy_pct === null ? "" : `, ${total.accuracy_pct}% accepted`
              }), pending ${summary.pending}`
            : `pending ${summary.pending}`;
    }

    private async open(caseId: string): Promise<void> {
        this.setError("");
        this.payload = await this.api.getCase(caseId);
        const buffer = this.payload.has_image
            ? await this.api.fetchImageBytes(caseId)
            : null;
        if (buffer) {
            const dims = await drawImageBytes(this.els.canvas, buffer);
            this.bounds = dims;
        } else {
            this.bounds = { width: 512, height: 512 };
            this.els.canvas.width = this.bounds.width;
            this.els.canvas.height = this.bounds.height;
        }
        this.els.overlay.setAttribute(
            "viewBox",
            `0 0 ${this.bounds.width} ${this.bounds.height}`,
        );

        if (this.payload.status === "measured" && this.payload.endpoints) {
            this.state = initState(this.payload.endpoints as Endpoints);
            this.els.banner.hidden = true;
            this.els.badge.textContent = this.payload.category ?? "";
            this.els.badge.dataset.category = this.payload.category ?? "";
            this.els.flags.textContent = (this.payload.flags ?? []).join(" ");
        } else {
            this.state = null;
            this.els.banner.hidden = false;
            this.els.banner.textContent = `unmeasurable: ${this.payload.reason ?? "?"}`;
            this.els.badge.textContent = "";
            this.els.flags.textContent = "";
        }
        this.selected = null;
        this.renderOverlay();
    }

    private verdictButtons(): Record<Verdict, HTMLButtonElement> {
        return {
            Accept: this.els.accept,
            Adjust: this.els.adjust,
            Reject: this.els.reject,
        };
    }

    private renderOverlay(): void {
        const svg = this.els.overlay;
        svg.replaceChildren();
        const buttons = this.verdictButtons();
        for (const btn of Object.values(buttons)) btn.disabled = true;
        buttons.Reject.disabled = false;

        if (!this.state) {
            this.els.ctr.textContent = "-";
            return;
        }
        const allowed = allowedVerdicts(this.state);
        for (const verdict of allowed) buttons[verdict].disabled = false;
        this.els.ctr.textContent = formatCtr(this.state.ctr);
        this.els.ctr.classList.toggle("invalid", this.state.ctr === null);
        this.els.reset.disabled = !this.state.dirty;

        const r = Math.max(3, this.bounds.width / 90);
        for (const key of SEGMENT_KEYS) {
            const seg = this.state.current[key];
            const line = document.createElementNS("http://www.w3.org/2000/svg", "line");
            line.setAttribute("x1", String(seg.a.x));
            line.setAttribute("y1", String(seg.a.y));
            line.setAttribute("x2", String(seg.b.x));
            line.setAttribute("y2", String(seg.b.y));
            line.setAttribute("stroke", SEGMENT_COLORS[key]);
            line.setAttribute("stroke-width", String(Math.max(1, r / 3)));
            svg.appendChild(line);
            for (const end of ["a", "b"] as EndKey[]) {
                const p = seg[end];
                const circle = document.createElementNS(
                    "http://www.w3.org/2000/svg",
                    "circle",
                );
                circle.setAttribute("cx", String(p.x));
                circle.setAttribute("cy", String(p.y));
                circle.setAttribute("r", String(r));
                circle.setAttribute("fill", "transparent");
                circle.setAttribute("stroke", SEGMENT_COLORS[key]);
                circle.setAttribute("stroke-width", String(Math.max(1, r / 3)));
                circle.classList.add("handle");
                if (
                    this.selected &&
                    this.selected.key === key &&
                    this.selected.end === end
                ) {
                    circle.classList.add("selected");
                }
                circle.addEventListener("pointerdown", (ev) =>
                    this.beginDrag(ev, { key, end }),
                );
                svg.appendChild(circle);
            }
        }
    }

    private toImageCoords(ev: PointerEvent): { x: number; y: number } {
        const rect = this.els.overlay.getBoundingClientRect();
        return {
            x: ((ev.clientX - rect.left) / rect.width) * this.bounds.width,
            y: ((ev.clientY - rect.top) / rect.height) * this.bounds.height,
        };
    }

    private beginDrag(ev: PointerEvent, handle: HandleRef): void {
        if (!this.state) return;
        ev.preventDefault();
        this.selected = handle;
        const move = (e: PointerEvent): void => {
            if (!this.state) return;
            this.state = dragEndpoint(
                this.state,
                handle.key,
                handle.end,
                this.toImageCoords(e),
                this.bounds,
            );
            this.renderOverlay();
        };
        const up = (): void => {
            document.removeEventListener("pointermove", move);
            document.removeEventListener("pointerup", up);
        };
        document.addEventListener("pointermove", move);
        document.addEventListener("pointerup", up);
        this.renderOverlay();
    }

    private onKey(ev: KeyboardEvent): void {
        if (!this.state || !this.selected) return;
        const steps: Record<string, [number, number]> = {
            ArrowLeft: [-1, 0],
            ArrowRight: [1, 0],
            ArrowUp: [0, -1],
            ArrowDown: [0, 1],
        };
        const step = steps[ev.key];
        if (!step) return;
        ev.preventDefault();
        this.state = nudgeEndpoint(
            this.state,
            this.selected.key,
            this.selected.end,
            step[0],
            step[1],
            this.bounds,
        );
        this.renderOverlay();
    }

    private async submit(verdict: Verdict): Promise<void> {
        if (!this.payload) return;
        if (verdict !== "Reject" && this.state) {
            if (!allowedVerdicts(this.state).includes(verdict)) return;
        }
        const reviewer = this.els.reviewer.value || "anonymous";
        const note = this.els.note.value || undefined;
        try {
            await this.api.submitReview(this.payload.case_id, verdict, {
                reviewer,
                note,
                ...(verdict === "Adjust" && this.state
                    ? { endpoints: this.state.current }
                    : {}),
            });
        } catch (err) {
            // adjustments stay on screen so nothing is lost on failure
            this.setError(`submit failed (${(err as Error).message}); state kept`);
            return;
        }
        this.els.note.value = "";
        await this.refreshList();
        await this.refreshSummary();
        const next = this.pending.find((c) => c.case_id !== this.payload?.case_id);
        if (next) {
            await this.open(next.case_id);
        } else {
            this.payload = null;
            this.state = null;
            this.renderOverlay();
            this.els.banner.hidden = false;
            this.els.banner.textContent = "queue empty";
        }
    }

    private setError(message: string): void {
        this.els.error.textContent = message;
        this.els.error.hidden = message === "";
    }
}

new App().start().catch((err) => {
    const banner = document.getElementById("banner");
    if (banner) {
        banner.hidden = false;
        banner.textContent = `failed to load: ${err}`;
    }
});
