import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");
// served from /ui, the API lives on the same origin at /v1
createApp(root, new ApiClient(""));
