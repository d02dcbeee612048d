// Measurement arithmetic and the draggable-endpoint state machine.
// CTR uses only the x-spans of the three segments: the y coordinate of a
// handle is free so the reviewer can align it with the anatomy.

export interface Pt {
    x: number;
    y: number;
}

export interface SegmentEnds {
    a: Pt;
    b: Pt;
}

export type SegmentKey = "mrd" | "mld" | "id";
export type EndKey = "a" | "b";

export type Endpoints = Record<SegmentKey, SegmentEnds>;

export const SEGMENT_KEYS: SegmentKey[] = ["mrd", "mld", "id"];

export interface Bounds {
    width: number;
    height: number;
}

export const xSpan = (seg: SegmentEnds): number => Math.abs(seg.b.x - seg.a.x);

/** Live CTR from the current endpoints; null when the ID span collapses. */
export function computeCtr(eps: Endpoints): number | null {
    const id = xSpan(eps.id);
    if (id === 0) return null;
    return (xSpan(eps.mrd) + xSpan(eps.mld)) / id;
}

export interface CaseState {
    base: Endpoints;
    current: Endpoints;
    dirty: boolean;
    ctr: number | null;
}

const clonePoint = (p: Pt): Pt => ({ x: p.x, y: p.y });

export function cloneEndpoints(eps: Endpoints): Endpoints {
    const out = {} as Endpoints;
    for (const key of SEGMENT_KEYS) {
        out[key] = { a: clonePoint(eps[key].a), b: clonePoint(eps[key].b) };
    }
    return out;
}

function samePoint(a: Pt, b: Pt): boolean {
    return a.x === b.x && a.y === b.y;
}

function sameEndpoints(a: Endpoints, b: Endpoints): boolean {
    return SEGMENT_KEYS.every(
        (k) => samePoint(a[k].a, b[k].a) && samePoint(a[k].b, b[k].b),
    );
}

export function initState(eps: Endpoints): CaseState {
    const base = cloneEndpoints(eps);
    return {
        base,
        current: cloneEndpoints(eps),
        dirty: false,
        ctr: computeCtr(base),
    };
}

export const clamp = (v: number, lo: number, hi: number): number =>
    Math.min(Math.max(v, lo), hi);

/** Move one handle; positions outside the image clamp to its edge. */
export function dragEndpoint(
    state: CaseState,
    key: SegmentKey,
    end: EndKey,
    pos: Pt,
    bounds: Bounds,
): CaseState {
    const current = cloneEndpoints(state.current);
    current[key][end] = {
        x: clamp(pos.x, 0, bounds.width - 1),
        y: clamp(pos.y, 0, bounds.height - 1),
    };
    return {
        base: state.base,
        current,
        dirty: !sameEndpoints(current, state.base),
        ctr: computeCtr(current),
    };
}

/** Keyboard nudge: one-pixel arrows for fine adjustment. */
export function nudgeEndpoint(
    state: CaseState,
    key: SegmentKey,
    end: EndKey,
    dx: number,
    dy: number,
    bounds: Bounds,
): CaseState {
    const p = state.current[key][end];
    return dragEndpoint(state, key, end, { x: p.x + dx, y: p.y + dy }, bounds);
}

export function resetState(state: CaseState): CaseState {
    return initState(state.base);
}

export type Verdict = "Accept" | "Adjust" | "Reject";

/** Which verdicts the current state permits. */
export function allowedVerdicts(state: CaseState): Verdict[] {
    const out: Verdict[] = ["Reject"];
    if (!state.dirty) out.unshift("Accept");
    else if (state.ctr !== null) out.unshift("Adjust");
    return out;
}

export function formatCtr(ctr: number | null): string {
    return ctr === null ? "invalid" : ctr.toFixed(3);
}
