import init, { canonicalPose, classifyPose, pcaScatter, simulateAndAnalyze } from "./pkg/kineseq_wasm.js";

const SVG = "http://www.w3.org/2000/svg";
const BONES = [
  ["left_shoulder", "right_shoulder"], ["left_hip", "right_hip"],
  ["left_shoulder", "left_hip"], ["right_shoulder", "right_hip"],
  ["left_shoulder", "left_elbow"], ["left_elbow", "left_wrist"],
  ["right_shoulder", "right_elbow"], ["right_elbow", "right_wrist"],
  ["left_hip", "left_knee"], ["left_knee", "left_ankle"],
  ["right_hip", "right_knee"], ["right_knee", "right_ankle"],
  ["nose", "left_eye"], ["nose", "right_eye"], ["left_eye", "left_ear"], ["right_eye", "right_ear"],
];

function el(name, attrs = {}, parent) {
  const e = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  if (parent) parent.appendChild(e);
  return e;
}

let keypoints = [];

function drawPose() {
  const svg = document.getElementById("pose");
  svg.replaceChildren();
  const at = Object.fromEntries(keypoints.map((k) => [k.name, k]));
  for (const [a, b] of BONES) {
    el("line", { class: "bone", x1: at[a].x, y1: at[a].y, x2: at[b].x, y2: at[b].y }, svg);
  }
  keypoints.forEach((k, i) => {
    const c = el("circle", { class: "joint", cx: k.x, cy: k.y, r: 7, fill: "#d62728" }, svg);
    c.addEventListener("pointerdown", (ev) => startDrag(ev, i));
    el("title", {}, c).textContent = k.name;
  });
  classifyCurrent();
}

function startDrag(ev, i) {
  const svg = document.getElementById("pose");
  const move = (e) => {
    const p = svg.createSVGPoint();
    p.x = e.clientX;
    p.y = e.clientY;
    const q = p.matrixTransform(svg.getScreenCTM().inverse());
    keypoints[i].x = Math.round(q.x * 4) / 4;
    keypoints[i].y = Math.round(q.y * 4) / 4;
    drawPose();
  };
  const up = () => {
    window.removeEventListener("pointermove", move);
    window.removeEventListener("pointerup", up);
  };
  window.addEventListener("pointermove", move);
  window.addEventListener("pointerup", up);
  ev.preventDefault();
}

function classifyCurrent() {
  const verdict = document.getElementById("verdict");
  const table = document.getElementById("angles");
  try {
    const r = JSON.parse(classifyPose(JSON.stringify(keypoints)));
    const pct = (100 * r.accuracy).toFixed(0);
    verdict.innerHTML = r.accepted
      ? `Pose <b>${r.label}</b>, ${r.votes}/${r.k} neighbours agree (${pct}%)`
      : `NULL: best guess ${r.label} with only ${pct}% agreement`;
    verdict.className = "";
    const names = ["L armpit", "R armpit", "L shoulder", "R shoulder", "L elbow", "R elbow",
      "L hip", "R hip", "L groin", "R groin", "L knee", "R knee"];
    table.innerHTML = names.map((n, i) => `<tr><td>${n}</td><td>${r.features.angles[i].toFixed(1)}°</td></tr>`).join("")
      + `<tr><td>torso</td><td>${(r.features.angular * 180 / Math.PI).toFixed(1)}° (${r.features.position > 0 ? "vertical" : "horizontal"})</td></tr>`;
  } catch (e) {
    verdict.textContent = String(e);
    verdict.className = "err";
    table.replaceChildren();
  }
}

function loadPose(label) {
  keypoints = JSON.parse(canonicalPose(label));
  drawPose();
}

function drawScatter() {
  const svg = document.getElementById("scatter");
  const pts = JSON.parse(pcaScatter());
  const xs = pts.map((p) => p.x);
  const ys = pts.map((p) => p.y);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const sx = (x) => 30 + ((x - x0) / (x1 - x0 || 1)) * 420;
  const sy = (y) => 330 - ((y - y0) / (y1 - y0 || 1)) * 300;
  el("text", { x: 240, y: 352, "text-anchor": "middle" }, svg).textContent = "PC1";
  el("text", { x: 12, y: 180, transform: "rotate(-90 12 180)", "text-anchor": "middle" }, svg).textContent = "PC2";
  for (const p of pts) {
    const c = el("circle", { cx: sx(p.x), cy: sy(p.y), r: 4, class: p.label, "fill-opacity": 0.7 }, svg);
    el("title", {}, c).textContent = p.label;
  }
}

function runSimulation() {
  const strip = document.getElementById("strip");
  const table = document.getElementById("report");
  const err = document.getElementById("sim-error");
  err.textContent = "";
  try {
    const r = JSON.parse(simulateAndAnalyze(
      document.getElementById("script").value,
      Number(document.getElementById("jitter").value),
      Number(document.getElementById("seed").value) >>> 0,
    ));
    const hit = new Set();
    for (const id of r.report.identified) for (let i = id.span.start; i < id.span.end; i++) hit.add(i);
    strip.innerHTML = r.frames.map((f, i) =>
      `<div class="${f.label ?? "null"}${hit.has(i) ? " hit" : ""}" title="${i}: ${f.label ?? "NULL"}"></div>`).join("");
    const rows = r.report.identified.map((id) =>
      `<tr><td>${id.movement}</td><td>${id.performed}</td><td>${id.variant}</td><td>${id.distance}</td>`
      + `<td>${(100 * id.total_accuracy).toFixed(1)}%</td><td>${id.start_ms}–${id.end_ms} ms</td></tr>`);
    const misses = r.report.unmatched.map((u) =>
      `<tr><td><i>no match</i></td><td>${u.performed}</td><td></td><td></td><td></td><td>${u.start_ms}–${u.end_ms} ms</td></tr>`);
    table.innerHTML = "<tr><th>movement</th><th>performed</th><th>closest variant</th><th>edits</th><th>accuracy</th><th>time</th></tr>"
      + rows.concat(misses).join("");
  } catch (e) {
    err.textContent = String(e);
  }
}

await init();
document.querySelectorAll("[data-pose]").forEach((b) => b.addEventListener("click", () => loadPose(b.dataset.pose)));
document.getElementById("run").addEventListener("click", runSimulation);
loadPose("C");
drawScatter();
runSimulation();
