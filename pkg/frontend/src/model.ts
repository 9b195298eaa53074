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

import type {
  RankingPayload,
  RatingPayload,
  VotePayload,
} from "./api.js";

// ---------------------------------------------------------------- rate

export interface RatingState {
  readonly kind: "rate";
  readonly taskId: string;
  readonly aspects: readonly string[];
  readonly values: Readonly<Record<string, number | null>>;
  readonly screenedOut: boolean;
  readonly exclusionReason: string;
}

export function newRatingState(
  taskId: string,
  aspects: readonly string[],
): RatingState {
  const values: Record<string, number | null> = {};
  for (const aspect of aspects) values[aspect] = null;
  return {
    kind: "rate",
    taskId,
    aspects: [...aspects],
    values,
    screenedOut: false,
    exclusionReason: "",
  };
}

export function setAspectValue(
  state: RatingState,
  aspect: string,
  value: number,
): RatingState {
  if (!(aspect in state.values)) {
    throw new Error(`unknown aspect: ${aspect}`);
  }
  if (!Number.isInteger(value) || value < 1 || value > 5) {
    throw new Error(`rating value must be an integer in [1, 5], got ${value}`);
  }
  return { ...state, values: { ...state.values, [aspect]: value } };
}

export function setScreenedOut(
  state: RatingState,
  screenedOut: boolean,
): RatingState {
  return {
    ...state,
    screenedOut,
    exclusionReason: screenedOut ? state.exclusionReason : "",
  };
}

export function setExclusionReason(
  state: RatingState,
  reason: string,
): RatingState {
  return { ...state, exclusionReason: reason };
}

export function ratingComplete(state: RatingState): boolean {
  const allScored = state.aspects.every(
    (aspect) => state.values[aspect] !== null,
  );
  if (!allScored) return false;
  return !state.screenedOut || state.exclusionReason.trim().length > 0;
}

export function ratingPayload(state: RatingState): RatingPayload {
  if (!ratingComplete(state)) {
    throw new Error("rating is incomplete");
  }
  const values: Record<string, number> = {};
  for (const aspect of state.aspects) {
    values[aspect] = state.values[aspect] as number;
  }
  const payload: RatingPayload = {
    task_id: state.taskId,
    values,
    valid: !state.screenedOut,
  };
  if (state.screenedOut) payload.exclusion_reason = state.exclusionReason.trim();
  return payload;
}

// ---------------------------------------------------------------- rank

export interface RankState {
  readonly kind: "rank";
  readonly taskId: string;
  /** Candidate ids in the order the service delivered them. */
  readonly served: readonly string[];
  /** Left pane: not yet ranked, in served order relative to each other. */
  readonly unranked: readonly string[];
  /** Right pane: current ranking, best first. */
  readonly ranked: readonly string[];
}

export function newRankState(
  taskId: string,
  candidateIds: readonly string[],
): RankState {
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

function checkPartition(state: RankState): RankState {
  const seen = [...state.unranked, ...state.ranked].sort();
  const expected = [...state.served].sort();
  if (
    seen.length !== expected.length ||
    seen.some((id, i) => id !== expected[i])
  ) {
    throw new Error("rank panes no longer partition the served candidates");
  }
  return state;
}

/** Move a candidate from the left pane into the right pane. */
export function rankCandidate(
  state: RankState,
  candidateId: string,
  position: number = state.ranked.length,
): RankState {
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
export function unrankCandidate(
  state: RankState,
  candidateId: string,
): RankState {
  if (!state.ranked.includes(candidateId)) {
    throw new Error(`candidate ${candidateId} is not in the ranked pane`);
  }
  const unranked = state.served.filter(
    (id) => state.unranked.includes(id) || id === candidateId,
  );
  return checkPartition({
    ...state,
    unranked,
    ranked: state.ranked.filter((id) => id !== candidateId),
  });
}

/** Reposition a candidate inside the right pane. */
export function moveRanked(
  state: RankState,
  candidateId: string,
  newIndex: number,
): RankState {
  const from = state.ranked.indexOf(candidateId);
  if (from < 0) {
    throw new Error(`candidate ${candidateId} is not in the ranked pane`);
  }
  const ranked = state.ranked.filter((id) => id !== candidateId);
  const at = Math.max(0, Math.min(newIndex, ranked.length));
  ranked.splice(at, 0, candidateId);
  return checkPartition({ ...state, ranked });
}

export function rankComplete(state: RankState): boolean {
  return state.unranked.length === 0 && state.ranked.length === state.served.length;
}

export function rankingPayload(state: RankState): RankingPayload {
  if (!rankComplete(state)) {
    throw new Error("ranking is incomplete");
  }
  return { task_id: state.taskId, order: [...state.ranked] };
}

// ---------------------------------------------------------------- vote

export interface VoteState {
  readonly kind: "vote";
  readonly taskId: string;
  readonly candidateIds: readonly string[];
  readonly worst: string | null;
}

export function newVoteState(
  taskId: string,
  candidateIds: readonly string[],
): VoteState {
  return { kind: "vote", taskId, candidateIds: [...candidateIds], worst: null };
}

export function setWorst(state: VoteState, candidateId: string): VoteState {
  if (!state.candidateIds.includes(candidateId)) {
    throw new Error(`unknown candidate: ${candidateId}`);
  }
  return { ...state, worst: candidateId };
}

export function voteComplete(state: VoteState): boolean {
  return state.worst !== null;
}

export function votePayload(state: VoteState): VotePayload {
  if (!voteComplete(state)) {
    throw new Error("no candidate selected");
  }
  return { task_id: state.taskId, worst: state.worst as string };
}

export type TaskState = RatingState | RankState | VoteState;
