import { ApiClient, randomSession } from "./api.js";
import { AnnotatorController } from "./controller.js";
import { ProgressPoller } from "./progress.js";
import { DomRenderer } from "./render.js";

function baseUrl(): string {
  // Served by the annotation service itself (under /ui) or anywhere else
  // with ?api=<origin>.
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? window.location.origin;
}

const api = new ApiClient(baseUrl(), randomSession());
const controller = new AnnotatorController(api, new DomRenderer(document));
const progress = new ProgressPoller(api, document);

document.addEventListener("keydown", (event) => {
  if (event.repeat) return;
  controller.handleKey(event.key);
});

progress.start();
void controller.run();
