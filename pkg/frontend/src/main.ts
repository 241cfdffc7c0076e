import { HttpApi } from "./api.js";
import { createApp } from "./app.js";

// Serve this page from the same origin as the annotation service (or a dev
// proxy) and point ?api= elsewhere only when CORS allows it.
const params = new URLSearchParams(window.location.search);
const api = new HttpApi(params.get("api") ?? "");
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

const app = createApp(root, api);
const size = params.get("n");
void app.start(params.get("annotator") ?? "anonymous", size ? Number(size) : undefined);
