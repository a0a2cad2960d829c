// Pure view models derived from service payloads. Splitting these out keeps
// the Leaflet layer thin and lets the contract tests assert on rendering
// counts and panel text without a browser.

import type { CameraCollection, RouteResponse } from "./api.js";

export interface CameraMarkerModel {
  id: string;
  kind: "directed" | "round";
  lat: number;
  lon: number;
  tooltip: string;
}

export interface ZonePolygonModel {
  id: string;
  kind: "directed" | "round";
  ring: [number, number][]; // [lat, lon] for the map layer
}

export interface CameraLayerModel {
  markers: CameraMarkerModel[];
  polygons: ZonePolygonModel[];
}

export function cameraLayerModel(doc: CameraCollection): CameraLayerModel {
  const markers: CameraMarkerModel[] = [];
  const polygons: ZonePolygonModel[] = [];
  for (const feature of doc.features) {
    const [lon, lat] = feature.geometry.coordinates;
    const props = feature.properties;
    markers.push({
      id: props.id,
      kind: props.kind,
      lat,
      lon,
      tooltip: `${props.id} (${props.kind}, ${props.range_m} m)`,
    });
    polygons.push({
      id: props.id,
      kind: props.kind,
      ring: props.zone_polygon.map(([rlon, rlat]) => [rlat, rlon]),
    });
  }
  return { markers, polygons };
}

export interface RoutePanelModel {
  total: string;
  exposed: string;
  cameras: string;
  detour: string;
}

export interface RouteLayerModel {
  latlngs: [number, number][];
  panel: RoutePanelModel;
  report: RouteResponse["report"];
}

export function formatMeters(value: number): string {
  return `${value.toFixed(1)} m`;
}

export function routeLayerModel(resp: RouteResponse): RouteLayerModel {
  const report = resp.report;
  return {
    latlngs: resp.route.coordinates.map(([lon, lat]) => [lat, lon]),
    panel: {
      total: formatMeters(report.total_m),
      exposed: formatMeters(report.exposed_m),
      cameras: String(report.distinct_cameras),
      detour: report.detour_ratio === null ? "-" : `${report.detour_ratio.toFixed(2)}x`,
    },
    report,
  };
}
