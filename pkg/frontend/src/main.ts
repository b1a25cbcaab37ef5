import { bootstrap } from "./ui.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ??
  "http://127.0.0.1:8000";

window.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (root) void bootstrap(root, SERVICE_URL);
});
