/**
 * Typed HTTP client for the annotation service.
 *
 * Every method returns a parsed response or throws an `ApiError`
 * carrying the HTTP status and the service's `detail` message, so the
 * caller can distinguish a rejected submission (4xx) from a transport
 * failure (plain `Error` / `TypeError` from fetch).
 */
/** Error raised for non-2xx responses; `status` is the HTTP code. */
export class ApiError extends Error {
    constructor(status, detail) {
        super(detail);
        this.name = "ApiError";
        this.status = status;
    }
}
function extractDetail(body) {
    if (typeof body !== "object" || body === null)
        return undefined;
    const detail = body.detail;
    if (typeof detail === "string")
        return detail;
    if (Array.isArray(detail)) {
        const messages = detail
            .map((item) => typeof item === "object" && item !== null && "msg" in item
            ? String(item.msg)
            : undefined)
            .filter((msg) => msg !== undefined);
        if (messages.length > 0)
            return messages.join("; ");
    }
    return undefined;
}
async function toApiError(response) {
    let detail;
    try {
        detail = extractDetail(await response.json());
    }
    catch {
        detail = undefined;
    }
    return new ApiError(response.status, detail ?? `HTTP ${response.status}`);
}
export class ApiClient {
    constructor(base = "", fetchImpl = fetch) {
        this.base = base.replace(/\/$/, "");
        this.fetchImpl = fetchImpl;
    }
    async request(path, init) {
        const response = await this.fetchImpl(`${this.base}${path}`, init);
        if (!response.ok)
            throw await toApiError(response);
        return (await response.json());
    }
    post(path, body) {
        return this.request(path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
    }
    createSession(annotatorId) {
        return this.post("/sessions", { annotator_id: annotatorId });
    }
    nextTask(sessionId) {
        return this.request(`/sessions/${encodeURIComponent(sessionId)}/next`);
    }
    submitRating(sessionId, payload) {
        return this.post(`/sessions/${encodeURIComponent(sessionId)}/ratings`, payload);
    }
    submitRanking(sessionId, payload) {
        return this.post(`/sessions/${encodeURIComponent(sessionId)}/rankings`, payload);
    }
    submitVote(sessionId, payload) {
        return this.post(`/sessions/${encodeURIComponent(sessionId)}/votes`, payload);
    }
}
