// Typed client for the review service JSON API. The UI never computes marks
// itself; everything displayed round-trips through these endpoints.

export interface ClusterMember {
    answer_id: string;
    text: string;
    h: number | null;
    tm: number | null;
    mm_prediction: number | null;
    distance_to_centroid: number | null;
}

export interface ClusterSummary {
    cluster_id: string;
    index: number;
    label: string;
    size: number;
    prototype_id: string | null;
    prototype_text: string;
    frequency_table: [string, number][];
    members: ClusterMember[];
}

export interface ClustersResponse {
    clusters: ClusterSummary[];
    version: number;
}

export interface FlagEntry {
    answer_id: string;
    reasons: string[];
}

export interface FlagsResponse {
    flags: FlagEntry[];
    version: number;
}

export interface MutationResponse {
    version: number;
}

export class ApiError extends Error {
    constructor(public status: number, public detail: string) {
        super(`HTTP ${status}: ${detail}`);
    }
}

export class ConflictError extends ApiError {
    constructor(detail: string) {
        super(409, detail);
    }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
    constructor(
        private baseUrl: string = "",
        private fetchImpl: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchImpl(this.baseUrl + path, init);
        if (!response.ok) {
            let detail = response.statusText;
            try {
                const body = await response.json();
                if (body && typeof body.detail === "string") {
                    detail = body.detail;
                }
            } catch {
                // non-JSON error body; keep the status text
            }
            if (response.status === 409) {
                throw new ConflictError(detail);
            }
            throw new ApiError(response.status, detail);
        }
        return response.json() as Promise<T>;
    }

    listRuns(): Promise<{ runs: string[] }> {
        return this.request("/runs");
    }

    getClusters(runId: string, questionId: string): Promise<ClustersResponse> {
        return this.request(
            `/runs/${encodeURIComponent(runId)}/questions/${encodeURIComponent(questionId)}/clusters`,
        );
    }

    getFlags(runId: string, questionId: string): Promise<FlagsResponse> {
        return this.request(
            `/runs/${encodeURIComponent(runId)}/questions/${encodeURIComponent(questionId)}/flags`,
        );
    }

    postClusterFeedback(
        runId: string,
        clusterId: string,
        mark: number | null,
        feedbackText: string,
        version: number,
    ): Promise<MutationResponse> {
        return this.request(
            `/runs/${encodeURIComponent(runId)}/clusters/${encodeURIComponent(clusterId)}/feedback`,
            {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify({ mark, feedback_text: feedbackText, version }),
            },
        );
    }

    postOverride(
        runId: string,
        answerId: string,
        mark: number,
        note: string,
        version: number,
    ): Promise<MutationResponse> {
        return this.request(
            `/runs/${encodeURIComponent(runId)}/answers/${encodeURIComponent(answerId)}/override`,
            {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify({ mark, note, version }),
            },
        );
    }

    async getExportCsv(runId: string): Promise<string> {
        const response = await this.fetchImpl(
            `${this.baseUrl}/runs/${encodeURIComponent(runId)}/export`,
        );
        if (!response.ok) {
            throw new ApiError(response.status, response.statusText);
        }
        return response.text();
    }
}
