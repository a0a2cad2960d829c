// UI state and the request contract: a route request carries exactly the
// selector/slider values at click time, and is only issued once both
// markers are set. Later requests supersede earlier in-flight ones.

import type { LatLon, RouteResponse } from "./api.js";

export type Mode = "default" | "privacy" | "safety";

export const MODE_OPTIONS: ReadonlyArray<{ value: Mode; label: string }> = [
  { value: "default", label: "Default" },
  { value: "privacy", label: "Avoid CCTV Cameras (privacy-first)" },
  { value: "safety", label: "Follow CCTV Cameras (safety-first)" },
];

export interface UiState {
  start: LatLon | null;
  end: LatLon | null;
  mode: Mode;
  lambda: number;
  beta: number;
  camerasVisible: boolean;
  editMode: boolean;
  lastRoute: RouteResponse | null;
  requestSeq: number; // bumps on every issued request; stale responses drop
}

export function initialState(): UiState {
  return {
    start: null,
    end: null,
    mode: "default",
    lambda: 10,
    beta: 0.7,
    camerasVisible: true,
    editMode: false,
    lastRoute: null,
    requestSeq: 0,
  };
}

export function setMarker(state: UiState, which: "start" | "end", p: LatLon): UiState {
  return { ...state, [which]: p };
}

export function setMode(state: UiState, mode: Mode): UiState {
  return { ...state, mode };
}

export function canRequestRoute(state: UiState): boolean {
  return state.start !== null && state.end !== null;
}

export function buildRouteQuery(state: UiState): URLSearchParams {
  if (!state.start || !state.end) {
    throw new Error("route request needs both markers set");
  }
  const query = new URLSearchParams();
  query.set("from", `${state.start.lat},${state.start.lon}`);
  query.set("to", `${state.end.lat},${state.end.lon}`);
  query.set("mode", state.mode);
  query.set("lambda", String(state.lambda));
  query.set("beta", String(state.beta));
  return query;
}

export function beginRequest(state: UiState): { state: UiState; token: number } {
  const token = state.requestSeq + 1;
  return { state: { ...state, requestSeq: token }, token };
}

export function isCurrent(state: UiState, token: number): boolean {
  return state.requestSeq === token;
}
