/**
 * Pure UI state for the three task modes.
 *
 * All updates return new state objects so views can re-render from
 * scratch and tests can assert on plain data.  The ranking state
 * maintains one invariant at every step: the union of the unranked and
 * ranked lists is exactly the set of candidates the task was created
 * with (each appearing once).  Submission payloads can only be built
 * from complete states, which is what gates the submit button.
 */
export function newRatingState(taskId, aspects) {
    const values = {};
    for (const aspect of aspects)
        values[aspect] = null;
    return {
        kind: "rate",
        taskId,
        aspects: [...aspects],
        values,
        screenedOut: false,
        exclusionReason: "",
    };
}
export function setAspectValue(state, aspect, value) {
    if (!(aspect in state.values)) {
        throw new Error(`unknown aspect: ${aspect}`);
    }
    if (!Number.isInteger(value) || value < 1 || value > 5) {
        throw new Error(`rating value must be an integer in [1, 5], got ${value}`);
    }
    return { ...state, values: { ...state.values, [aspect]: value } };
}
export function setScreenedOut(state, screenedOut) {
    return {
        ...state,
        screenedOut,
        exclusionReason: screenedOut ? state.exclusionReason : "",
    };
}
export function setExclusionReason(state, reason) {
    return { ...state, exclusionReason: reason };
}
export function ratingComplete(state) {
    const allScored = state.aspects.every((aspect) => state.values[aspect] !== null);
    if (!allScored)
        return false;
    return !state.screenedOut || state.exclusionReason.trim().length > 0;
}
export function ratingPayload(state) {
    if (!ratingComplete(state)) {
        throw new Error("rating is incomplete");
    }
    const values = {};
    for (const aspect of state.aspects) {
        values[aspect] = state.values[aspect];
    }
    const payload = {
        task_id: state.taskId,
        values,
        valid: !state.screenedOut,
    };
    if (state.screenedOut)
        payload.exclusion_reason = state.exclusionReason.trim();
    return payload;
}
export function newRankState(taskId, candidateIds) {
    if (new Set(candidateIds).size !== candidateIds.length) {
        throw new Error("duplicate candidate ids");
    }
    return {
        kind: "rank",
        taskId,
        served: [...candidateIds],
        unranked: [...candidateIds],
        ranked: [],
    };
}
function checkPartition(state) {
    const seen = [...state.unranked, ...state.ranked].sort();
    const expected = [...state.served].sort();
    if (seen.length !== expected.length ||
        seen.some((id, i) => id !== expected[i])) {
        throw new Error("rank panes no longer partition the served candidates");
    }
    return state;
}
/** Move a candidate from the left pane into the right pane. */
export function rankCandidate(state, candidateId, position = state.ranked.length) {
    if (!state.unranked.includes(candidateId)) {
        throw new Error(`candidate ${candidateId} is not in the unranked pane`);
    }
    const ranked = [...state.ranked];
    const at = Math.max(0, Math.min(position, ranked.length));
    ranked.splice(at, 0, candidateId);
    return checkPartition({
        ...state,
        unranked: state.unranked.filter((id) => id !== candidateId),
        ranked,
    });
}
/** Send a candidate back to the left pane (served order restored there). */
export function unrankCandidate(state, candidateId) {
    if (!state.ranked.includes(candidateId)) {
        throw new Error(`candidate ${candidateId} is not in the ranked pane`);
    }
    const unranked = state.served.filter((id) => state.unranked.includes(id) || id === candidateId);
    return checkPartition({
        ...state,
        unranked,
        ranked: state.ranked.filter((id) => id !== candidateId),
    });
}
/** Reposition a candidate inside the right pane. */
export function moveRanked(state, candidateId, newIndex) {
    const from = state.ranked.indexOf(candidateId);
    if (from < 0) {
        throw new Error(`candidate ${candidateId} is not in the ranked pane`);
    }
    const ranked = state.ranked.filter((id) => id !== candidateId);
    const at = Math.max(0, Math.min(newIndex, ranked.length));
    ranked.splice(at, 0, candidateId);
    return checkPartition({ ...state, ranked });
}
export function rankComplete(state) {
    return state.unranked.length === 0 && state.ranked.length === state.served.length;
}
export function rankingPayload(state) {
    if (!rankComplete(state)) {
        throw new Error("ranking is incomplete");
    }
    return { task_id: state.taskId, order: [...state.ranked] };
}
export function newVoteState(taskId, candidateIds) {
    return { kind: "vote", taskId, candidateIds: [...candidateIds], worst: null };
}
export function setWorst(state, candidateId) {
    if (!state.candidateIds.includes(candidateId)) {
        throw new Error(`unknown candidate: ${candidateId}`);
    }
    return { ...state, worst: candidateId };
}
export function voteComplete(state) {
    return state.worst !== null;
}
export function votePayload(state) {
    if (!voteComplete(state)) {
        throw new Error("no candidate selected");
    }
    return { task_id: state.taskId, worst: state.worst };
}
