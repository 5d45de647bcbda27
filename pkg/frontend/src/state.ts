// Pure view-model logic: panel ordering, mark validation, and pending-edit
// bookkeeping. Kept free of DOM and network so it is directly testable.

import { ClusterSummary, FlagEntry } from "./api.js";

export const PANEL_ORDER = ["Excellent", "Mixed", "Weak"];

export interface PendingEdit {
    kind: "cluster" | "override";
    targetId: string;
    mark: number | null;
    text: string;
    version: number;
}

export interface ConflictRecord {
    edit: PendingEdit;
    detail: string;
}

export interface ViewState {
    runId: string | null;
    questionId: string | null;
    clusters: ClusterSummary[];
    flags: FlagEntry[];
    version: number;
    conflicts: ConflictRecord[];
    errorBanner: string | null;
}

export function initialState(): ViewState {
    return {
        runId: null,
        questionId: null,
        clusters: [],
        flags: [],
        version: 0,
        conflicts: [],
        errorBanner: null,
    };
}

// Panels render Excellent, Mixed, Weak, then unlabeled; ties keep cluster index order.
export function orderPanels(clusters: ClusterSummary[]): ClusterSummary[] {
    const rank = (label: string): number => {
        const i = PANEL_ORDER.indexOf(label);
        return i === -1 ? PANEL_ORDER.length : i;
    };
    return [...clusters].sort(
        (a, b) => rank(a.label) - rank(b.label) || a.index - b.index,
    );
}

// Prototype first, then remaining members by answer id.
export function orderMembers(cluster: ClusterSummary): ClusterSummary["members"] {
    return [...cluster.members].sort((a, b) => {
        if (a.answer_id === cluster.prototype_id) return -1;
        if (b.answer_id === cluster.prototype_id) return 1;
        return a.answer_id.localeCompare(b.answer_id);
    });
}

export function validateMark(raw: string): { mark: number | null; error: string | null } {
    const trimmed = raw.trim();
    if (trimmed === "") {
        return { mark: null, error: null };
    }
    const mark = Number(trimmed);
    if (!Number.isFinite(mark)) {
        return { mark: null, error: "mark must be a number" };
    }
    if (mark < 0 || mark > 5) {
        return { mark: null, error: "mark must be between 0 and 5" };
    }
    return { mark, error: null };
}

// A conflicted edit is retained (never silently dropped) until the teacher
// resolves the merge prompt.
export function recordConflict(
    state: ViewState,
    edit: PendingEdit,
    detail: string,
): ViewState {
    return { ...state, conflicts: [...state.conflicts, { edit, detail }] };
}

export function resolveConflict(state: ViewState, targetId: string): ViewState {
    return {
        ...state,
        conflicts: state.conflicts.filter((c) => c.edit.targetId !== targetId),
    };
}

export function flagQueueEmpty(state: ViewState): boolean {
    return state.flags.length === 0;
}

export function formatMark(mark: number | null): string {
    return mark === null ? "—" : mark.toFixed(2);
}

export function frequencyBarWidths(
    table: [string, number][],
    maxWidth = 100,
): { term: string; count: number; width: number }[] {
    const top = table.length > 0 ? table[0][1] : 1;
    return table.map(([term, count]) => ({
        term,
        count,
        width: Math.max(1, Math.round((count / top) * maxWidth)),
    }));
}
