// Typed client for the routing service. Every number the UI displays comes
// from these responses; the UI itself never computes routing math.

export interface LatLon {
  lat: number;
  lon: number;
}

export interface CameraFeature {
  type: "Feature";
  geometry: { type: "Point"; coordinates: [number, number] };
  properties: {
    id: string;
    kind: "directed" | "round";
    heading_deg?: number;
    fov_deg?: number;
    range_m: number;
    source?: string;
    confidence?: number;
    zone_polygon: [number, number][]; // [lon, lat] ring, closed
    [extra: string]: unknown;
  };
}

export interface CameraCollection {
  type: "FeatureCollection";
  features: CameraFeature[];
}

export interface RouteReport {
  distinct_cameras: number;
  exposed_m: number;
  total_m: number;
  exposure_share: number;
  detour_ratio: number | null;
}

export interface RouteResponse {
  route: { type: "LineString"; coordinates: [number, number][] };
  report: RouteReport;
  mode: string;
  params: { lambda: number; beta: number; camera_penalty_m: number };
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<never> {
  let message = `HTTP ${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(resp.status, message);
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(`${this.base}/health`);
      return resp.ok;
    } catch {
      return false;
    }
  }

  async getCameras(): Promise<CameraCollection> {
    const resp = await fetch(`${this.base}/cameras`);
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as CameraCollection;
  }

  async getRoute(query: URLSearchParams): Promise<RouteResponse> {
    const resp = await fetch(`${this.base}/route?${query.toString()}`);
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as RouteResponse;
  }

  async postCamera(feature: object): Promise<CameraFeature> {
    const resp = await fetch(`${this.base}/cameras`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(feature),
    });
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as CameraFeature;
  }
}
