// Review dashboard entry point: renders cluster panels and the flag queue for
// a selected run/question, and submits marks with version tokens.

import { ApiError, ConflictError, ClusterSummary, ReviewApi } from "./api.js";
import {
    PendingEdit,
    ViewState,
    flagQueueEmpty,
    formatMark,
    frequencyBarWidths,
    initialState,
    orderMembers,
    orderPanels,
    recordConflict,
    resolveConflict,
    validateMark,
} from "./state.js";

const api = new ReviewApi("");
let state: ViewState = initialState();

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

function byId(id: string): HTMLElement {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
}

async function refresh(): Promise<void> {
    if (!state.runId || !state.questionId) return;
    try {
        const [clusters, flags] = await Promise.all([
            api.getClusters(state.runId, state.questionId),
            api.getFlags(state.runId, state.questionId),
        ]);
        state = {
            ...state,
            clusters: clusters.clusters,
            flags: flags.flags,
            version: clusters.version,
            errorBanner: null,
        };
    } catch (error) {
        state = {
            ...state,
            errorBanner:
                error instanceof ApiError
                    ? `service error: ${error.detail}`
                    : "service unreachable",
        };
    }
    render();
}

async function submit(edit: PendingEdit): Promise<void> {
    if (!state.runId) return;
    try {
        if (edit.kind === "cluster") {
            await api.postClusterFeedback(
                state.runId, edit.targetId, edit.mark, edit.text, edit.version,
            );
        } else {
            if (edit.mark === null) return;
            await api.postOverride(
                state.runId, edit.targetId, edit.mark, edit.text, edit.version,
            );
        }
    } catch (error) {
        if (error instanceof ConflictError) {
            state = recordConflict(state, edit, error.detail);
        } else if (error instanceof ApiError) {
            state = { ...state, errorBanner: `save failed: ${error.detail}` };
        } else {
            state = { ...state, errorBanner: "service unreachable" };
        }
    }
    await refresh();
}

function renderErrorBanner(root: HTMLElement): void {
    if (!state.errorBanner) return;
    const banner = el("div", "error-banner", state.errorBanner);
    const retry = el("button", "", "retry");
    retry.onclick = () => void refresh();
    banner.appendChild(retry);
    root.appendChild(banner);
}

function renderConflicts(root: HTMLElement): void {
    for (const conflict of state.conflicts) {
        const prompt = el("div", "conflict-prompt");
        prompt.appendChild(
            el(
                "p",
                "",
                `Your edit to ${conflict.edit.targetId} conflicts with another ` +
                    `reviewer's change (${conflict.detail}). The panel below shows ` +
                    "their saved state.",
            ),
        );
        const retry = el("button", "", "re-apply my edit");
        retry.onclick = () => {
            const edit = { ...conflict.edit, version: state.version };
            state = resolveConflict(state, conflict.edit.targetId);
            void submit(edit);
        };
        const discard = el("button", "", "keep theirs");
        discard.onclick = () => {
            state = resolveConflict(state, conflict.edit.targetId);
            render();
        };
        prompt.appendChild(retry);
        prompt.appendChild(discard);
        root.appendChild(prompt);
    }
}

function renderFrequencyTable(cluster: ClusterSummary): HTMLElement {
    const list = el("ul", "freq-bars");
    for (const row of frequencyBarWidths(cluster.frequency_table.slice(0, 12))) {
        const item = el("li");
        const bar = el("span", "bar");
        bar.style.width = `${row.width}%`;
        item.appendChild(bar);
        item.appendChild(el("span", "term", `${row.term} (${row.count})`));
        list.appendChild(item);
    }
    return list;
}

function renderMemberRow(cluster: ClusterSummary, memberId: string): HTMLElement {
    const member = cluster.members.find((m) => m.answer_id === memberId);
    if (!member) return el("tr");
    const row = el("tr", member.answer_id === cluster.prototype_id ? "prototype" : "");
    row.appendChild(el("td", "", member.answer_id));
    row.appendChild(el("td", "answer-text", member.text));
    row.appendChild(el("td", "", member.h === null ? "—" : String(member.h)));
    row.appendChild(el("td", "", formatMark(member.tm)));
    row.appendChild(el("td", "", formatMark(member.mm_prediction)));

    const actions = el("td");
    const markInput = el("input");
    markInput.placeholder = "mark";
    markInput.size = 4;
    const noteInput = el("input");
    noteInput.placeholder = "note";
    const save = el("button", "", "override");
    save.onclick = () => {
        const { mark, error } = validateMark(markInput.value);
        if (error || mark === null) {
            markInput.setCustomValidity(error ?? "mark required");
            markInput.reportValidity();
            return;
        }
        void submit({
            kind: "override",
            targetId: member.answer_id,
            mark,
            text: noteInput.value,
            version: state.version,
        });
    };
    actions.appendChild(markInput);
    actions.appendChild(noteInput);
    actions.appendChild(save);
    row.appendChild(actions);
    return row;
}

function renderClusterPanel(cluster: ClusterSummary): HTMLElement {
    const panel = el("section", `cluster-panel label-${cluster.label.toLowerCase() || "none"}`);
    panel.appendChild(
        el("h3", "", `${cluster.cluster_id} — ${cluster.label || "unlabeled"} (${cluster.size})`),
    );
    panel.appendChild(renderFrequencyTable(cluster));

    const table = el("table", "members");
    const head = el("tr");
    for (const col of ["answer", "text", "h", "TM", "MM", "actions"]) {
        head.appendChild(el("th", "", col));
    }
    table.appendChild(head);
    for (const member of orderMembers(cluster)) {
        table.appendChild(renderMemberRow(cluster, member.answer_id));
    }
    panel.appendChild(table);

    const form = el("div", "cluster-feedback");
    const markInput = el("input");
    markInput.placeholder = "cluster mark";
    markInput.size = 4;
    const feedbackInput = el("input");
    feedbackInput.placeholder = "common feedback";
    const save = el("button", "", "save cluster feedback");
    save.onclick = () => {
        const { mark, error } = validateMark(markInput.value);
        if (error) {
            markInput.setCustomValidity(error);
            markInput.reportValidity();
            return;
        }
        void submit({
            kind: "cluster",
            targetId: cluster.cluster_id,
            mark,
            text: feedbackInput.value,
            version: state.version,
        });
    };
    form.appendChild(markInput);
    form.appendChild(feedbackInput);
    form.appendChild(save);
    panel.appendChild(form);
    return panel;
}

function renderFlagQueue(root: HTMLElement): void {
    const section = el("section", "flag-queue");
    section.appendChild(el("h2", "", "Needs review"));
    if (flagQueueEmpty(state)) {
        section.appendChild(el("p", "empty", "no answers need review"));
    } else {
        const list = el("ul");
        for (const flag of state.flags) {
            list.appendChild(
                el("li", "", `${flag.answer_id}: ${flag.reasons.join(", ")}`),
            );
        }
        section.appendChild(list);
    }
    root.appendChild(section);
}

function render(): void {
    const root = byId("app");
    root.textContent = "";
    renderErrorBanner(root);
    renderConflicts(root);
    if (state.runId) {
        const exportLink = el("a", "export-link", "download effective marks (CSV)");
        exportLink.setAttribute("href", `/runs/${encodeURIComponent(state.runId)}/export`);
        root.appendChild(exportLink);
    }
    renderFlagQueue(root);
    for (const cluster of orderPanels(state.clusters)) {
        root.appendChild(renderClusterPanel(cluster));
    }
}

async function populateRunPicker(): Promise<void> {
    const picker = byId("run-picker") as HTMLSelectElement;
    try {
        const { runs } = await api.listRuns();
        picker.textContent = "";
        for (const runId of runs) {
            const option = el("option", "", runId);
            option.value = runId;
            picker.appendChild(option);
        }
        if (runs.length > 0) {
            state = { ...state, runId: runs[runs.length - 1] };
            picker.value = state.runId!;
        }
    } catch {
        state = { ...state, errorBanner: "service unreachable" };
        render();
    }
}

export function start(): void {
    const picker = byId("run-picker") as HTMLSelectElement;
    const questionInput = byId("question-input") as HTMLInputElement;
    const loadButton = byId("load-button");
    picker.onchange = () => {
        state = { ...state, runId: picker.value };
    };
    loadButton.onclick = () => {
        state = { ...state, questionId: questionInput.value.trim() };
        void refresh();
    };
    void populateRunPicker();
    render();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
    start();
}
