/** Browser bootstrap: wires the panel controller to the static page. */

import { ApiClient } from "./api.js";
import { DEMO_PROFILE, DEMO_READINGS } from "./demo.js";
import { PanelController } from "./panel.js";
import {
  renderActiveRecs,
  renderChips,
  renderFaultToggles,
  renderRecommendations,
  renderSentence,
  renderSliders,
  renderStale,
} from "./render.js";
import type { PanelState } from "./state.js";
import { knownSources } from "./state.js";

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function render(state: PanelState): void {
  byId("stale").innerHTML = renderStale(state.stale);
  byId("sentence").innerHTML = renderSentence(state.context);
  byId("chips").innerHTML = renderChips(state.context);
  byId("recs").innerHTML = renderRecommendations(state.recommendations);
  byId("active-recs").innerHTML = renderActiveRecs(
    state.recommendations, state.config ? state.config.specs : []);
  byId("sliders").innerHTML = renderSliders(state.sliders, state.weightsError);
  byId("faults").innerHTML = renderFaultToggles(
    knownSources(state.context), state.disabledSources);
  byId("session-label").textContent = state.sessionId ?? "(none)";
}

async function boot(): Promise<void> {
  const baseInput = byId("api-base") as HTMLInputElement;
  baseInput.value = baseInput.value || "http://127.0.0.1:8080";
  let controller: PanelController | null = null;

  byId("connect").addEventListener("click", async () => {
    controller?.stop();
    const api = new ApiClient(baseInput.value.replace(/\/$/, ""));
    controller = new PanelController(api, { onRender: render });
    await controller.openSession(DEMO_PROFILE);
    controller.start();
  });

  byId("demo-tick").addEventListener("click", async () => {
    if (!controller || controller.state.sessionId === null) return;
    const api = new ApiClient(baseInput.value.replace(/\/$/, ""));
    await api.postEvents(controller.state.sessionId, DEMO_READINGS);
    await controller.pollOnce();
  });

  document.addEventListener("input", (event) => {
    const target = event.target as HTMLInputElement;
    const recId = target.dataset ? target.dataset.slider : undefined;
    if (recId && controller) controller.setSlider(recId, Number(target.value));
  });

  document.addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    const source = target.dataset ? target.dataset.fault : undefined;
    if (source && controller) void controller.toggleSource(source, target.checked);
  });
}

void boot();
