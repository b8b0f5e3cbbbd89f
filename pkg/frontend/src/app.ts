/** Wires the options panel, result table, and side panels to the API.
 * Loaded as a module by index.html. */

import { ApiClient, ApiError, LatestOnly } from "./api.js";
import {
  defaultState,
  swapPreferences,
  toRequest,
  type OptionsState,
} from "./state.js";
import {
  renderError,
  renderKeywordPanel,
  renderResults,
  renderScatter,
  renderSelect,
  renderSimilar,
} from "./render.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export async function start(baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const inflight = new LatestOnly();
  let state: OptionsState = defaultState();

  const errorEl = byId<HTMLElement>("error");
  const resultsBody = byId<HTMLElement>("results-body");
  const keywordsEl = byId<HTMLElement>("keywords");
  const similarBody = byId<HTMLElement>("similar-body");
  const scatter = byId<HTMLElement>("scatter") as unknown as SVGSVGElement;

  const catalog = await api.catalog();
  renderSelect(byId("major"), catalog.majors, "any major");
  renderSelect(byId("interest"), catalog.subjects, "no interest");
  renderSelect(byId("disinterest"), catalog.subjects, "no disinterest");
  renderSelect(byId("department"), catalog.departments, "any department");
  renderSelect(byId("requirement-list"), catalog.requirement_lists, "any requirement");
  byId<HTMLElement>("version").textContent = catalog.model_version;

  function readPanel(): OptionsState {
    const sel = (id: string) => {
      const v = byId<HTMLSelectElement>(id).value;
      return v === "" ? null : v;
    };
    const checked = (id: string) => byId<HTMLInputElement>(id).checked;
    const student = byId<HTMLInputElement>("student-id").value.trim();
    return {
      studentId: student === "" ? null : student,
      major: sel("major"),
      useCollaborative: checked("collaborative"),
      collaborativeWeight: Number(byId<HTMLInputElement>("collab-weight").value) || 1.0,
      interest: sel("interest"),
      disinterest: sel("disinterest"),
      filters: {
        offered: checked("f-offered"),
        notTaken: checked("f-not-taken"),
        noCreditRestriction: checked("f-no-credit"),
        department: sel("department"),
        requirementList: sel("requirement-list"),
        openSeats: checked("f-open-seats"),
        registrarList: checked("f-registrar"),
      },
      k: Number(byId<HTMLInputElement>("top-k").value) || 10,
    };
  }

  async function submit(next: OptionsState): Promise<void> {
    state = next;
    renderError(errorEl, null);
    try {
      const resp = await inflight.run(() => api.query(toRequest(state)));
      if (resp === null) return; // superseded by a newer submit
      renderResults(resultsBody, resp.results);
    } catch (err) {
      renderError(errorEl, err instanceof ApiError ? err.message : String(err));
    }
  }

  byId<HTMLElement>("submit").addEventListener("click", () => {
    void submit(readPanel());
  });
  byId<HTMLElement>("swap").addEventListener("click", () => {
    const swapped = swapPreferences(readPanel());
    byId<HTMLSelectElement>("interest").value = swapped.interest ?? "";
    byId<HTMLSelectElement>("disinterest").value = swapped.disinterest ?? "";
    void submit(swapped);
  });

  resultsBody.addEventListener("click", async (ev) => {
    const row = (ev.target as HTMLElement).closest("tr.result-row");
    const course = row instanceof HTMLElement ? row.dataset.course : undefined;
    if (!course) return;
    try {
      renderSimilar(similarBody, await api.similar(course));
    } catch (err) {
      renderError(errorEl, err instanceof ApiError ? err.message : String(err));
    }
  });

  byId<HTMLElement>("show-keywords").addEventListener("click", async () => {
    const sid = byId<HTMLInputElement>("student-id").value.trim();
    try {
      const resp = await api.keywords(sid);
      renderKeywordPanel(keywordsEl, resp.semesters);
    } catch (err) {
      renderError(errorEl, err instanceof ApiError ? err.message : String(err));
    }
  });

  byId<HTMLElement>("show-projection").addEventListener("click", async () => {
    const method = byId<HTMLSelectElement>("projection-method").value;
    try {
      const resp = await api.projection(method);
      renderScatter(scatter, resp.points);
    } catch (err) {
      renderError(errorEl, err instanceof ApiError ? err.message : String(err));
    }
  });

  await submit(state);
}
