// Entry point: read the page configuration and mount the screen.
// The restart control ships disabled; add ?restart=1 to show it.

import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const app = new App({
  enableRestart: params.get("restart") === "1",
});
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
app.mount(root);
