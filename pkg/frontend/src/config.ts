// Build-time configuration. Edit before `npm run build` to point the bundle
// at a different service or basemap.

export const API_BASE = "";  // same origin by default; e.g. "http://127.0.0.1:8080"

export const TILE_URL = "https://tile.openstreetmap.org/{z}/{x}/{y}.png";
export const TILE_ATTRIBUTION = "&copy; OpenStreetMap contributors";
