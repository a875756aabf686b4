/** Browser workbench: queue review with live validation and table preview.

Everything renders from the view model on each change; there is no DOM
state of its own, so the preview, violation list, and submit buttons can
never disagree about the current annotation state.
*/

import { ApiClient } from "./api.js";
import { ReviewSession } from "./session.js";
import { ReviewViewModel } from "./viewmodel.js";
import { ENTITY_LABELS, RELATION_LABELS, TableData } from "./types.js";

const SPAN_CLASS: Record<string, string> = {
  INTV: "tok-intv",
  MEAS: "tok-meas",
  OC: "tok-oc",
};

type Child = Node | string;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: Child[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  for (const child of children) node.append(child);
  return node;
}

function tokenStrip(vm: ReviewViewModel): HTMLElement {
  const byToken = new Map<number, string>();
  for (const span of vm.spans) {
    for (let idx = span.token_start; idx <= span.token_end; idx++) {
      byToken.set(idx, span.label);
    }
  }
  const strip = el("div", { class: "tokens" });
  vm.tokens.forEach((token, idx) => {
    const label = byToken.get(idx);
    const cls = label === undefined ? "tok" : `tok ${SPAN_CLASS[label] ?? "tok-other"}`;
    strip.append(el("span", { class: cls, title: `token ${idx}` }, [token.text]));
  });
  return strip;
}

function previewTable(table: TableData): HTMLElement {
  const head = el("tr", {}, table.header.map((cell) => el("th", {}, [cell])));
  const body = table.rows.map((row) =>
    el("tr", {}, row.map((cell) => el("td", {}, [cell]))),
  );
  const wrap = el("div", { class: "preview" }, [
    el("table", {}, [el("thead", {}, [head]), el("tbody", {}, body)]),
  ]);
  if (table.diagnostics.length > 0) {
    wrap.append(
      el("ul", { class: "diagnostics" }, table.diagnostics.map((d) => el("li", {}, [d]))),
    );
  }
  return wrap;
}

function labelSelect(options: readonly string[]): HTMLSelectElement {
  return el("select", {}, options.map((label) => el("option", { value: label }, [label])));
}

function numberInput(placeholder: string): HTMLInputElement {
  return el("input", { type: "number", placeholder, min: "0", style: "width:5em" });
}

function spanEditor(vm: ReviewViewModel, redraw: () => void): HTMLElement {
  const list = el("ul", { class: "spans" });
  for (const span of vm.spans) {
    const remove = el("button", {}, ["remove"]);
    remove.onclick = () => {
      vm.removeSpan(span.token_start);
      redraw();
    };
    list.append(
      el("li", {}, [`${span.label} [${span.token_start}..${span.token_end}] `, remove]),
    );
  }
  const start = numberInput("start");
  const end = numberInput("end");
  const label = labelSelect(ENTITY_LABELS);
  const add = el("button", {}, ["add span"]);
  add.onclick = () => {
    vm.addSpan(Number(start.value), Number(end.value), label.value);
    redraw();
  };
  return el("section", {}, [el("h3", {}, ["Spans"]), list, start, end, label, add]);
}

function edgeEditor(vm: ReviewViewModel, redraw: () => void): HTMLElement {
  const list = el("ul", { class: "edges" });
  for (const edge of vm.edges) {
    const remove = el("button", {}, ["remove"]);
    remove.onclick = () => {
      vm.removeEdge(edge.head, edge.child, edge.label);
      redraw();
    };
    list.append(el("li", {}, [`${edge.label} ${edge.head}->${edge.child} `, remove]));
  }
  const head = numberInput("head");
  const child = numberInput("child");
  const label = labelSelect(RELATION_LABELS);
  const add = el("button", {}, ["add edge"]);
  add.onclick = () => {
    vm.addEdge(Number(head.value), Number(child.value), label.value);
    redraw();
  };
  return el("section", {}, [el("h3", {}, ["Edges"]), list, head, child, label, add]);
}

function statusLine(vm: ReviewViewModel): HTMLElement {
  const parts: Child[] = [`item ${vm.itemId} · revision ${vm.revision}`];
  if (vm.dirty) parts.push(" · edited");
  return el("p", { class: "status" }, parts);
}

export function mountWorkbench(root: HTMLElement, client: ApiClient): ReviewSession {
  const session = new ReviewSession(client);

  const redraw = (): void => {
    root.replaceChildren();
    const vm = session.current;
    if (vm === null) {
      const load = el("button", {}, ["load next pending item"]);
      load.onclick = () => {
        void session.loadNext().then(redraw);
      };
      root.append(el("p", {}, ["No item loaded."]), load);
      return;
    }
    root.append(statusLine(vm), el("p", { class: "sentence" }, [vm.text]), tokenStrip(vm));
    if (vm.conflict !== null) {
      root.append(el("p", { class: "conflict" }, [`Conflict: ${vm.conflict}`]));
    }
    root.append(spanEditor(vm, redraw), edgeEditor(vm, redraw));

    const violations = vm.violations();
    if (violations.length > 0) {
      root.append(
        el("ul", { class: "violations" }, violations.map((v) => el("li", {}, [v]))),
      );
    }
    if (vm.serverRejection !== null) {
      root.append(
        el(
          "ul",
          { class: "violations server" },
          vm.serverRejection.map((v) => el("li", {}, [v])),
        ),
      );
    }
    root.append(el("h3", {}, ["Table preview"]), previewTable(vm.preview()));

    const submit = (verdict: "accept" | "reject"): void => {
      void session.submit(verdict).then((result) => {
        if (result.ok) void session.loadNext().then(redraw);
        else redraw();
      });
    };
    const accept = el("button", { class: "accept" }, ["accept"]);
    const reject = el("button", { class: "reject" }, ["reject"]);
    accept.disabled = reject.disabled = !vm.submitEnabled;
    accept.onclick = () => submit("accept");
    reject.onclick = () => submit("reject");
    root.append(el("div", { class: "actions" }, [accept, reject]));
  };

  void session.loadNext().then(redraw);
  return session;
}

declare global {
  interface Window {
    reviewSession?: ReviewSession;
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root !== null) {
    const base =
      new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";
    window.reviewSession = mountWorkbench(root, new ApiClient(base));
  }
}
