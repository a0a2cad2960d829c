// Leaflet bindings. Leaflet ships via a CDN <script> tag, so it appears
// here only as the global `L`.

import { TILE_URL, TILE_ATTRIBUTION } from "./config.js";
import type { CameraLayerModel, RouteLayerModel } from "./render.js";
import type { LatLon } from "./api.js";

declare const L: any;

const CAMERA_COLORS = { directed: "#d9822b", round: "#e6c300" };

export interface MapHandles {
  map: any;
  cameraLayer: any;
  routeLayer: any;
  markerLayer: any;
}

export function initMap(elementId: string, center: LatLon, zoom = 16): MapHandles {
  const map = L.map(elementId).setView([center.lat, center.lon], zoom);
  L.tileLayer(TILE_URL, { attribution: TILE_ATTRIBUTION, maxZoom: 19 }).addTo(map);
  return {
    map,
    cameraLayer: L.layerGroup().addTo(map),
    routeLayer: L.layerGroup().addTo(map),
    markerLayer: L.layerGroup().addTo(map),
  };
}

export function drawCameras(handles: MapHandles, model: CameraLayerModel): void {
  handles.cameraLayer.clearLayers();
  for (const polygon of model.polygons) {
    L.polygon(polygon.ring, {
      color: CAMERA_COLORS[polygon.kind],
      weight: 1,
      fillOpacity: 0.25,
    }).addTo(handles.cameraLayer);
  }
  for (const marker of model.markers) {
    L.circleMarker([marker.lat, marker.lon], {
      radius: 5,
      color: CAMERA_COLORS[marker.kind],
      fillOpacity: 0.9,
    })
      .bindTooltip(marker.tooltip)
      .addTo(handles.cameraLayer);
  }
}

export function setCamerasVisible(handles: MapHandles, visible: boolean): void {
  if (visible) {
    handles.map.addLayer(handles.cameraLayer);
  } else {
    handles.map.removeLayer(handles.cameraLayer);
  }
}

export function drawRoute(handles: MapHandles, model: RouteLayerModel): void {
  handles.routeLayer.clearLayers();
  L.polyline(model.latlngs, { color: "#1565c0", weight: 4 }).addTo(handles.routeLayer);
}

export function clearRoute(handles: MapHandles): void {
  handles.routeLayer.clearLayers();
}

export function drawEndpoints(
  handles: MapHandles, start: LatLon | null, end: LatLon | null
): void {
  handles.markerLayer.clearLayers();
  if (start) {
    L.marker([start.lat, start.lon], { title: "start" }).addTo(handles.markerLayer);
  }
  if (end) {
    L.marker([end.lat, end.lon], { title: "end" }).addTo(handles.markerLayer);
  }
}
