/**
 * Application controller: one annotation session per browser tab.
 *
 * The session id is kept in sessionStorage so a mid-task reload resumes
 * the same session — the service re-serves the same task with the same
 * per-session candidate order, so what the annotator sees is stable.
 * At most one submission is ever in flight: the submit button is
 * disabled while a request is pending and re-enabled only after the
 * service acknowledges or rejects it.  A rejection (4xx) shows an
 * inline banner and preserves the entered state; a transport failure
 * shows a retry affordance and never leaves a partial submission.
 */
import { ApiClient, ApiError } from "./api.js";
import { clearBanner, initialState, renderBanner, renderDone, renderRetry, renderStart, renderTask, } from "./dom.js";
import { rankingPayload, ratingPayload, votePayload, } from "./model.js";
const SESSION_KEY = "figsumm-session-id";
function defaultStorage() {
    try {
        return window.sessionStorage;
    }
    catch {
        const bag = new Map();
        return {
            getItem: (key) => bag.get(key) ?? null,
            setItem: (key, value) => void bag.set(key, value),
            removeItem: (key) => void bag.delete(key),
        };
    }
}
export class App {
    constructor(root, api, strings, storage = defaultStorage()) {
        this.sessionId = null;
        this.task = null;
        this.state = null;
        this.busy = false;
        this.root = root;
        this.api = api;
        this.strings = strings;
        this.storage = storage;
    }
    async start() {
        const stored = this.storage.getItem(SESSION_KEY);
        if (stored) {
            this.sessionId = stored;
            await this.loadNext();
            return;
        }
        renderStart(this.root, this.strings, (annotatorId) => {
            void this.createSession(annotatorId);
        });
    }
    async createSession(annotatorId) {
        try {
            const session = await this.api.createSession(annotatorId);
            this.sessionId = session.session_id;
            this.storage.setItem(SESSION_KEY, session.session_id);
            clearBanner(this.root);
            await this.loadNext();
        }
        catch (error) {
            if (error instanceof ApiError) {
                renderBanner(this.root, error.message);
            }
            else {
                renderRetry(this.root, this.strings, String(error), () => {
                    void this.createSession(annotatorId);
                });
            }
        }
    }
    async loadNext() {
        if (!this.sessionId)
            return;
        try {
            const task = await this.api.nextTask(this.sessionId);
            clearBanner(this.root);
            if (task.done) {
                this.task = null;
                this.state = null;
                renderDone(this.root, this.strings);
                return;
            }
            this.task = task;
            this.state = initialState(task);
            this.render();
        }
        catch (error) {
            if (error instanceof ApiError && error.status === 404) {
                // The stored session no longer exists (service restarted with a
                // fresh store); fall back to the start screen.
                this.storage.removeItem(SESSION_KEY);
                this.sessionId = null;
                renderStart(this.root, this.strings, (annotatorId) => {
                    void this.createSession(annotatorId);
                });
                renderBanner(this.root, String(error instanceof Error ? error.message : error));
                return;
            }
            renderRetry(this.root, this.strings, String(error instanceof Error ? error.message : error), () => {
                void this.loadNext();
            });
        }
    }
    render() {
        if (!this.task || !this.state)
            return;
        renderTask(this.root, this.task, this.state, this.strings, {
            onChange: (state) => {
                this.state = state;
                this.render();
            },
            onSubmit: () => {
                void this.submit();
            },
        }, this.busy);
    }
    async submit() {
        if (this.busy || !this.sessionId || !this.state)
            return;
        const sessionId = this.sessionId;
        const state = this.state;
        this.busy = true;
        this.render();
        try {
            if (state.kind === "rate") {
                await this.api.submitRating(sessionId, ratingPayload(state));
            }
            else if (state.kind === "rank") {
                await this.api.submitRanking(sessionId, rankingPayload(state));
            }
            else {
                await this.api.submitVote(sessionId, votePayload(state));
            }
            this.busy = false;
            clearBanner(this.root);
            await this.loadNext();
        }
        catch (error) {
            this.busy = false;
            if (error instanceof ApiError) {
                this.render();
                renderBanner(this.root, error.message);
            }
            else {
                this.render();
                renderRetry(this.root, this.strings, String(error instanceof Error ? error.message : error), () => {
                    void this.submit();
                });
            }
        }
    }
}
export async function boot(root, base = "") {
    const response = await fetch("strings.json");
    if (!response.ok) {
        throw new Error(`failed to load strings.json: HTTP ${response.status}`);
    }
    const strings = (await response.json());
    document.title = strings.appTitle;
    const app = new App(root, new ApiClient(base), strings);
    await app.start();
    return app;
}
const mount = typeof document !== "undefined" ? document.getElementById("app") : null;
if (mount) {
    void boot(mount).catch((error) => {
        mount.textContent = `Failed to start: ${String(error)}`;
    });
}
