import init, { consistency, score, overlap } from "./pkg/termkit_web.js";

const $ = (id) => document.getElementById(id);

function escape(s) {
  return s.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);
}

// Offsets are in Unicode scalar values, so slice over code points.
function highlight(text, spans, original) {
  const chars = Array.from(text);
  let out = "";
  let pos = 0;
  for (const s of spans) {
    out += escape(chars.slice(pos, s.start).join(""));
    const cls = original.has(s.surface.toLowerCase()) ? "" : ' class="added"';
    out += `<mark${cls}>${escape(chars.slice(s.start, s.end).join(""))}</mark>`;
    pos = s.end;
  }
  return out + escape(chars.slice(pos).join(""));
}

function showError(el, e) {
  el.innerHTML = `<p class="err">${escape(String(e.message ?? e))}</p>`;
}

function runConsistency() {
  const out = $("consistency-out");
  try {
    const lines = $("terms").value.split("\n");
    const result = JSON.parse(
      consistency($("docs").value, $("terms").value, $("dc").checked, $("cc").checked, Number($("threshold").value)),
    );
    const rows = result.documents.map((d, i) => {
      const original = new Set((lines[i] ?? "").split(/[,;]/).map((t) => t.trim().toLowerCase()).filter(Boolean));
      const body = d.spans.length ? highlight(d.text, d.spans, original) : escape(d.text);
      return `<p><b>${d.id}</b> ${body}<br><small>terms: ${escape(d.terms.join(", "))}</small></p>`;
    });
    const promoted = result.promoted.length ? escape(result.promoted.join(", ")) : "none";
    out.innerHTML = rows.join("") + `<p>promoted by CC: ${promoted}; spans added by DC: ${result.dc_added}</p>`;
  } catch (e) {
    showError(out, e);
  }
}

function runScore() {
  const out = $("score-out");
  try {
    const r = JSON.parse(score($("gold").value, $("pred").value));
    const c = r.counts;
    out.innerHTML =
      `<table><tr><th>P</th><th>R</th><th>F1</th><th>matched</th><th>predicted</th><th>gold</th></tr>` +
      `<tr><td>${r.precision.toFixed(4)}</td><td>${r.recall.toFixed(4)}</td><td>${r.f1.toFixed(4)}</td>` +
      `<td>${c.matched}</td><td>${c.predicted}</td><td>${c.gold}</td></tr></table>`;
  } catch (e) {
    showError(out, e);
  }
}

// mulberry32
function prng(seed) {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussian(rand) {
  const u = 1 - rand();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * rand());
}

function randomPoints(datasets, n, spread, seed) {
  const rand = prng(seed);
  const dim = 8;
  const centres = Array.from({ length: datasets }, () => Array.from({ length: dim }, () => gaussian(rand) * spread));
  return Array.from({ length: n }, (_, i) => {
    const d = i % datasets;
    return {
      dataset: String.fromCharCode(65 + d),
      id: `p${i}`,
      vector: centres[d].map((c) => c + gaussian(rand)),
    };
  });
}

function matrix(labels, values) {
  const head = `<tr><th></th>${labels.map((l) => `<th>${l}</th>`).join("")}</tr>`;
  const rows = values.map(
    (row, i) => `<tr><th>${labels[i]}</th>${row.map((v) => `<td>${(v * 100).toFixed(1)}</td>`).join("")}</tr>`,
  );
  return `<table>${head}${rows.join("")}</table>`;
}

function runOverlap() {
  const out = $("overlap-out");
  try {
    const pts = randomPoints(
      Number($("ov-datasets").value),
      Number($("ov-points").value),
      Number($("ov-spread").value),
      Number($("ov-seed").value),
    );
    const r = JSON.parse(overlap(JSON.stringify(pts), Number($("ov-k").value)));
    out.innerHTML =
      `<p>directional (row = origin, %)</p>${matrix(r.datasets, r.directional)}` +
      `<p>symmetrized (%)</p>${matrix(r.datasets, r.symmetrized)}`;
  } catch (e) {
    showError(out, e);
  }
}

await init();
$("run-consistency").addEventListener("click", runConsistency);
$("run-score").addEventListener("click", runScore);
$("run-overlap").addEventListener("click", runOverlap);
runConsistency();
runScore();
runOverlap();
