import { describe, expect, it } from "vitest";

import {
    Endpoints,
    allowedVerdicts,
    computeCtr,
    dragEndpoint,
    formatCtr,
    initState,
    nudgeEndpoint,
    resetState,
} from "../src/ctr.js";

const BOUNDS = { width: 512, height: 512 };

function handGeometry(): Endpoints {
    // heart spans 120 px split 60/60 around the midline, chest spans 240
    return {
        mrd: { a: { x: 100, y: 200 }, b: { x: 160, y: 200 } },
        mld: { a: { x: 160, y: 210 }, b: { x: 220, y: 210 } },
        id: { a: { x: 40, y: 150 }, b: { x: 280, y: 150 } },
    };
}

describe("computeCtr", () => {
    it("matches the hand geometry", () => {
        expect(computeCtr(handGeometry())).toBe(0.5);
    });

    it("uses absolute x-spans regardless of endpoint order", () => {
        const eps = handGeometry();
        const flipped: Endpoints = {
            mrd: { a: eps.mrd.b, b: eps.mrd.a },
            mld: eps.mld,
            id: { a: eps.id.b, b: eps.id.a },
        };
        expect(computeCtr(flipped)).toBe(0.5);
    });

    it("ignores y coordinates entirely", () => {
        const eps = handGeometry();
        eps.mrd.a.y = 5;
        eps.id.b.y = 400;
        expect(computeCtr(eps)).toBe(0.5);
    });

    it("is null when the ID span collapses", () => {
        const eps = handGeometry();
        eps.id.b = { ...eps.id.a };
        expect(computeCtr(eps)).toBeNull();
        expect(formatCtr(computeCtr(eps))).toBe("invalid");
    });
});

describe("drag state", () => {
    it("widening the heart from 120 to 144 gives live ctr 0.6", () => {
        let state = initState(handGeometry());
        // move the MLD outer endpoint 24 px outward: spans 60 + 84 = 144
        state = dragEndpoint(state, "mld", "b", { x: 244, y: 210 }, BOUNDS);
        expect(state.ctr).toBe(0.6);
        expect(state.dirty).toBe(true);
    });

    it("drag and drag back restores a clean state", () => {
        let state = initState(handGeometry());
        state = dragEndpoint(state, "mrd", "a", { x: 90, y: 190 }, BOUNDS);
        expect(state.dirty).toBe(true);
        state = dragEndpoint(state, "mrd", "a", { x: 100, y: 200 }, BOUNDS);
        expect(state.dirty).toBe(false);
        expect(state.ctr).toBe(0.5);
    });

    it("clamps drags outside the image", () => {
        let state = initState(handGeometry());
        state = dragEndpoint(state, "id", "b", { x: 9999, y: -50 }, BOUNDS);
        expect(state.current.id.b).toEqual({ x: 511, y: 0 });
    });

    it("nudges by single pixels", () => {
        let state = initState(handGeometry());
        state = nudgeEndpoint(state, "mld", "b", 1, 0, BOUNDS);
        expect(state.current.mld.b.x).toBe(221);
        expect(state.ctr).toBe(121 / 240);
        state = nudgeEndpoint(state, "mld", "b", -1, 0, BOUNDS);
        expect(state.dirty).toBe(false);
    });

    it("does not mutate the base endpoints", () => {
        const eps = handGeometry();
        let state = initState(eps);
        state = dragEndpoint(state, "id", "a", { x: 0, y: 0 }, BOUNDS);
        expect(state.base.id.a).toEqual({ x: 40, y: 150 });
        expect(eps.id.a).toEqual({ x: 40, y: 150 });
    });

    it("reset returns to the server measurement", () => {
        let state = initState(handGeometry());
        state = dragEndpoint(state, "id", "a", { x: 0, y: 0 }, BOUNDS);
        state = resetState(state);
        expect(state.dirty).toBe(false);
        expect(state.ctr).toBe(0.5);
    });
});

describe("allowed verdicts", () => {
    it("clean state allows Accept, not Adjust", () => {
        const state = initState(handGeometry());
        const allowed = allowedVerdicts(state);
        expect(allowed).toContain("Accept");
        expect(allowed).toContain("Reject");
        expect(allowed).not.toContain("Adjust");
    });

    it("dirty state allows Adjust, not Accept", () => {
        let state = initState(handGeometry());
        state = dragEndpoint(state, "mrd", "a", { x: 99, y: 200 }, BOUNDS);
        const allowed = allowedVerdicts(state);
        expect(allowed).toContain("Adjust");
        expect(allowed).not.toContain("Accept");
    });

    it("collapsed ID disables Adjust even when dirty", () => {
        let state = initState(handGeometry());
        state = dragEndpoint(state, "id", "b", { x: 40, y: 150 }, BOUNDS);
        expect(state.dirty).toBe(true);
        expect(state.ctr).toBeNull();
        expect(allowedVerdicts(state)).toEqual(["Reject"]);
    });
});
