// Page bootstrap: wires the map, the mode selector/sliders, and the camera
// form to the service.

import { ApiClient, ApiError, type LatLon } from "./api.js";
import { API_BASE } from "./config.js";
import {
  MODE_OPTIONS,
  type Mode,
  type UiState,
  beginRequest,
  buildRouteQuery,
  canRequestRoute,
  initialState,
  isCurrent,
  setMarker,
  setMode,
} from "./state.js";
import { cameraLayerModel, routeLayerModel } from "./render.js";
import {
  type MapHandles,
  clearRoute,
  drawCameras,
  drawEndpoints,
  drawRoute,
  initMap,
  setCamerasVisible,
} from "./map.js";

const api = new ApiClient(API_BASE);
let state: UiState = initialState();
let handles: MapHandles;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function notice(text: string, isError = false): void {
  const banner = el<HTMLDivElement>("notice");
  banner.textContent = text;
  banner.className = isError ? "notice error" : "notice";
  banner.hidden = text === "";
}

async function loadCameras(): Promise<void> {
  try {
    const doc = await api.getCameras();
    drawCameras(handles, cameraLayerModel(doc));
    notice("");
  } catch {
    notice("camera layer unavailable; retry below", true);
    el<HTMLButtonElement>("retry-cameras").hidden = false;
  }
}

async function planRoute(): Promise<void> {
  if (!canRequestRoute(state)) {
    notice("set both start and end markers first");
    return;
  }
  const begun = beginRequest(state);
  state = begun.state;
  const query = buildRouteQuery(state);
  try {
    const resp = await api.getRoute(query);
    if (!isCurrent(state, begun.token)) return; // superseded by a newer click
    state = { ...state, lastRoute: resp };
    const model = routeLayerModel(resp);
    drawRoute(handles, model);
    el<HTMLSpanElement>("panel-total").textContent = model.panel.total;
    el<HTMLSpanElement>("panel-exposed").textContent = model.panel.exposed;
    el<HTMLSpanElement>("panel-cameras").textContent = model.panel.cameras;
    el<HTMLSpanElement>("panel-detour").textContent = model.panel.detour;
    el<HTMLDivElement>("panel").hidden = false;
    notice("");
  } catch (err) {
    if (!isCurrent(state, begun.token)) return;
    clearRoute(handles);
    if (err instanceof ApiError && err.status === 422) {
      notice("no path found between these points", true);
    } else {
      notice(err instanceof Error ? err.message : "route request failed", true);
    }
  }
}

function onMapClick(p: LatLon): void {
  if (state.editMode) {
    openCameraForm(p);
    return;
  }
  // first click places the start, the next the end; further clicks move the end
  if (!state.start) {
    state = setMarker(state, "start", p);
  } else {
    state = setMarker(state, "end", p);
  }
  drawEndpoints(handles, state.start, state.end);
  if (canRequestRoute(state)) void planRoute();
}

function openCameraForm(p: LatLon): void {
  const form = el<HTMLFormElement>("camera-form");
  form.hidden = false;
  el<HTMLInputElement>("form-lat").value = String(p.lat);
  el<HTMLInputElement>("form-lon").value = String(p.lon);
  el<HTMLDivElement>("form-error").textContent = "";
}

async function submitCameraForm(event: Event): Promise<void> {
  event.preventDefault();
  const kind = el<HTMLSelectElement>("form-kind").value;
  const heading = el<HTMLInputElement>("form-heading").value;
  const fov = el<HTMLInputElement>("form-fov").value;
  const range = el<HTMLInputElement>("form-range").value;
  const properties: Record<string, unknown> = {
    id: el<HTMLInputElement>("form-id").value,
    kind,
    source: "imported",
  };
  if (range) properties.range_m = Number(range);
  if (kind === "directed") {
    if (heading) properties.heading_deg = Number(heading);
    if (fov) properties.fov_deg = Number(fov);
  }
  const feature = {
    type: "Feature",
    geometry: {
      type: "Point",
      coordinates: [
        Number(el<HTMLInputElement>("form-lon").value),
        Number(el<HTMLInputElement>("form-lat").value),
      ],
    },
    properties,
  };
  try {
    await api.postCamera(feature);
    el<HTMLFormElement>("camera-form").hidden = true;
    await loadCameras();
  } catch (err) {
    el<HTMLDivElement>("form-error").textContent =
      err instanceof ApiError ? err.message : "request failed";
  }
}

function bindControls(): void {
  const selector = el<HTMLSelectElement>("mode");
  for (const option of MODE_OPTIONS) {
    const node = document.createElement("option");
    node.value = option.value;
    node.textContent = option.label;
    selector.appendChild(node);
  }
  selector.addEventListener("change", () => {
    state = setMode(state, selector.value as Mode);
    if (canRequestRoute(state)) void planRoute();
  });

  const lambda = el<HTMLInputElement>("lambda");
  lambda.addEventListener("change", () => {
    state = { ...state, lambda: Number(lambda.value) };
    if (state.mode === "privacy" && canRequestRoute(state)) void planRoute();
  });
  const beta = el<HTMLInputElement>("beta");
  beta.addEventListener("change", () => {
    state = { ...state, beta: Number(beta.value) };
    if (state.mode === "safety" && canRequestRoute(state)) void planRoute();
  });

  el<HTMLInputElement>("cameras-visible").addEventListener("change", (event) => {
    state = { ...state, camerasVisible: (event.target as HTMLInputElement).checked };
    setCamerasVisible(handles, state.camerasVisible);
  });
  el<HTMLInputElement>("edit-mode").addEventListener("change", (event) => {
    state = { ...state, editMode: (event.target as HTMLInputElement).checked };
  });
  el<HTMLButtonElement>("retry-cameras").addEventListener("click", () => {
    el<HTMLButtonElement>("retry-cameras").hidden = true;
    void loadCameras();
  });
  el<HTMLFormElement>("camera-form").addEventListener("submit", submitCameraForm);
  el<HTMLButtonElement>("form-cancel").addEventListener("click", () => {
    el<HTMLFormElement>("camera-form").hidden = true;
  });
}

async function start(): Promise<void> {
  handles = initMap("map", { lat: 60.1718, lon: 24.9435 });
  handles.map.on("click", (event: any) =>
    onMapClick({ lat: event.latlng.lat, lon: event.latlng.lng })
  );
  bindControls();
  await loadCameras();
}

document.addEventListener("DOMContentLoaded", () => void start());
