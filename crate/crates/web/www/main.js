import init, { classify, analyzeModule, categorify } from "./pkg/fusionmod_web.js";

const $ = (id) => document.getElementById(id);

function el(tag, text, cls) {
  const e = document.createElement(tag);
  if (text !== undefined) e.textContent = text;
  if (cls) e.className = cls;
  return e;
}

function table(headers, rows) {
  const t = el("table");
  const head = t.insertRow();
  headers.forEach((h) => head.appendChild(el("th", h)));
  rows.forEach((r) => {
    const tr = t.insertRow();
    r.forEach((cell) => {
      const td = tr.insertCell();
      if (cell instanceof Node) td.appendChild(cell);
      else td.textContent = cell;
    });
  });
  return t;
}

function matrices(m) {
  const lines = Object.entries(m).map(
    ([label, rows]) => `${label}:\n` + rows.map((r) => "  " + r.join(" ")).join("\n"),
  );
  return el("pre", lines.join("\n"));
}

function show(target, build) {
  const out = $(target);
  out.replaceChildren();
  try {
    build(out);
  } catch (e) {
    out.appendChild(el("p", String(e), "err"));
  }
}

$("classify").onclick = () =>
  show("classify-out", (out) => {
    const res = JSON.parse(classify(Number($("rank").value)));
    out.appendChild(el("p", `counts per rank: ${res.counts.join(", ")}`));
    out.appendChild(
      table(
        ["module", "rank", "matrices"],
        res.modules.map((m) => [m.label ?? "(unlabeled)", m.rank, matrices(m.matrices)]),
      ),
    );
  });

$("analyze").onclick = () =>
  show("analyze-out", (out) => {
    const a = JSON.parse(analyzeModule($("module").value));
    const problems = [...a.representation, ...a.based];
    if (problems.length) {
      out.appendChild(el("p", "Not a based module:", "err"));
      out.appendChild(el("pre", problems.join("\n")));
    } else {
      const verdict = a.irreducible
        ? `irreducible, equivalent to ${a.fixture}`
        : `reducible into ranks ${a.components.join(" + ")}`;
      out.appendChild(el("p", `Based module of rank ${a.module.rank}: ${verdict}`, "ok"));
    }
    out.appendChild(matrices(a.module.matrices));
  });

$("categorify").onclick = () =>
  show("categorify-out", (out) => {
    const c = JSON.parse(categorify());
    out.appendChild(
      table(
        ["module category", "route", "module", "rho2/rho3 swapped"],
        c.rows.map((r) => [r.name, r.route, r.standard ?? "reducible", r.swapped ?? "reducible"]),
      ),
    );
    out.appendChild(
      el("p", c.all_match ? "Every fixture's list is reproduced." : "Mismatch with the fixture lists.", c.all_match ? "ok" : "err"),
    );
  });

await init();
