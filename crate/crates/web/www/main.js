import init, { parameterize, applyMutation, mixField, renderPreview, previewSampleRate } from "./pkg/sonospace_web.js";

const ROOM = 10;
const FIELD_CELLS = 48;
const PALETTE = ["#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

const canvas = document.getElementById("room");
const ctx = canvas.getContext("2d");
const scale = canvas.width / ROOM;
const $ = (id) => document.getElementById(id);

let scene = {
  format_version: 1,
  c: 0.5,
  d: 1,
  max_segment_length: 0.25,
  receptor: { x: 5, y: 5 },
  emitters: [
    { id: "violin", x: 2, y: 2.5, track: "violin" },
    { id: "drums", x: 7.5, y: 8, track: "drums" },
  ],
  materials: [
    { id: "brick", r_filter: { kind: "delay", params: { time: 0.08, feedback: 0.4 } },
      t_filter: { kind: "low_pass", params: { cutoff: 400 } } },
    { id: "glass", r_filter: { kind: "phaser", params: { rate: 0.8, depth: 0.7 } },
      t_filter: { kind: "gain", params: { g: 0.6 } } },
  ],
  walls: [
    { id: "w1", material_id: "brick", vertices: [[1, 4], [4, 4.5], [6.5, 3]] },
  ],
};
let snapshot = null;
let field = null;
let drag = null;
let draft = [];

const toWorld = (e) => {
  const r = canvas.getBoundingClientRect();
  return { x: (e.clientX - r.left) / scale, y: (e.clientY - r.top) / scale };
};

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "hint error" : "hint";
}

function mutate(mutation) {
  try {
    scene = JSON.parse(applyMutation(JSON.stringify(scene), JSON.stringify(mutation)));
    refresh();
    return true;
  } catch (err) {
    status(String(err), true);
    return false;
  }
}

function refresh({ withField = true } = {}) {
  snapshot = JSON.parse(parameterize(JSON.stringify(scene)));
  if (withField) computeField();
  draw();
  table();
}

function computeField() {
  const quantity = $("quantity").value;
  const index = Number($("field-emitter").value || 0);
  field = quantity && scene.emitters.length
    ? { quantity, values: mixField(JSON.stringify(scene), index, FIELD_CELLS, FIELD_CELLS, quantity) }
    : null;
}

function drawField() {
  if (!field) return;
  const max = Math.max(...field.values, 1e-9);
  const cell = canvas.width / FIELD_CELLS;
  field.values.forEach((v, i) => {
    const t = Math.sqrt(v / max);
    ctx.fillStyle = `rgba(40, 90, 200, ${(0.75 * t).toFixed(3)})`;
    ctx.fillRect((i % FIELD_CELLS) * cell, Math.floor(i / FIELD_CELLS) * cell, cell + 0.5, cell + 0.5);
  });
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  drawField();
  const colour = (id) => PALETTE[scene.materials.findIndex((m) => m.id === id) % PALETTE.length];
  ctx.lineWidth = 4;
  ctx.lineCap = "round";
  for (const w of scene.walls) {
    ctx.strokeStyle = colour(w.material_id);
    ctx.beginPath();
    w.vertices.forEach(([x, y], i) => (i ? ctx.lineTo(x * scale, y * scale) : ctx.moveTo(x * scale, y * scale)));
    ctx.stroke();
  }
  if (draft.length) {
    ctx.strokeStyle = "#999";
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    draft.forEach(([x, y], i) => (i ? ctx.lineTo(x * scale, y * scale) : ctx.moveTo(x * scale, y * scale)));
    ctx.stroke();
    ctx.setLineDash([]);
  }
  ctx.font = "12px system-ui";
  scene.emitters.forEach((e, i) => {
    const mix = snapshot?.per_emitter[i];
    const radius = 8 + 10 * Math.min(1, mix ? mix.r_mix + mix.t_mix : 0);
    ctx.fillStyle = "#333";
    ctx.beginPath();
    ctx.arc(e.x * scale, e.y * scale, 7, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "rgba(51, 51, 51, 0.4)";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(e.x * scale, e.y * scale, radius, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.fillText(e.id, e.x * scale + 12, e.y * scale - 10);
  });
  const r = scene.receptor;
  ctx.fillStyle = "#b00";
  ctx.fillRect(r.x * scale - 7, r.y * scale - 7, 14, 14);
}

function table() {
  const rows = snapshot.per_emitter.map((m) =>
    `<tr><td>${m.emitter_id}</td><td>${m.d_mix.toFixed(3)}</td><td>${m.r_mix.toFixed(3)}</td><td>${m.t_mix.toFixed(3)}</td></tr>`);
  $("mixes").innerHTML = `<tr><th>emitter</th><th>dMix</th><th>rMix</th><th>tMix</th></tr>${rows.join("")}`;
}

function populate() {
  $("material").innerHTML = scene.materials.map((m) => `<option>${m.id}</option>`).join("");
  $("field-emitter").innerHTML = scene.emitters.map((e, i) => `<option value="${i}">${e.id}</option>`).join("");
  for (const k of ["c", "d"]) {
    $(k).value = scene[k];
    $(`${k}-out`).textContent = scene[k];
  }
}

function pick(p) {
  const near = (q) => Math.hypot(q.x - p.x, q.y - p.y) < 0.3;
  if (near(scene.receptor)) return { kind: "receptor" };
  const e = scene.emitters.find(near);
  return e ? { kind: "emitter", id: e.id } : null;
}

const mode = () => document.querySelector("input[name=mode]:checked").value;

canvas.addEventListener("pointerdown", (ev) => {
  const p = toWorld(ev);
  if (mode() === "wall") {
    draft.push([p.x, p.y]);
    draw();
    return;
  }
  drag = pick(p);
  if (drag) canvas.setPointerCapture(ev.pointerId);
});

canvas.addEventListener("pointermove", (ev) => {
  if (!drag) return;
  const p = toWorld(ev);
  const mutation = drag.kind === "receptor"
    ? { op: "move_receptor", x: p.x, y: p.y }
    : { op: "move_emitter", id: drag.id, x: p.x, y: p.y };
  try {
    scene = JSON.parse(applyMutation(JSON.stringify(scene), JSON.stringify(mutation)));
    refresh({ withField: false });
  } catch (err) {
    status(String(err), true);
  }
});

canvas.addEventListener("pointerup", () => {
  if (drag) {
    drag = null;
    refresh();
  }
});

canvas.addEventListener("dblclick", () => {
  if (mode() !== "wall") return;
  // The double click also landed one extra vertex.
  const vertices = draft.slice(0, -1);
  draft = [];
  if (vertices.length >= 2 && mutate({ op: "add_wall", material_id: $("material").value, vertices })) {
    status(`wall added (${vertices.length} vertices)`);
  } else {
    draw();
  }
});

$("quantity").addEventListener("change", () => refresh());
$("field-emitter").addEventListener("change", () => refresh());
for (const k of ["c", "d"]) {
  $(k).addEventListener("input", () => {
    $(`${k}-out`).textContent = $(k).value;
    mutate({ op: "set_constants", [k]: Number($(k).value) });
  });
}

$("play").addEventListener("click", async () => {
  status("rendering...");
  const started = performance.now();
  const samples = renderPreview(JSON.stringify(scene), 3);
  const audio = new AudioContext();
  const buffer = audio.createBuffer(1, samples.length, previewSampleRate());
  buffer.copyToChannel(samples, 0);
  const source = audio.createBufferSource();
  source.buffer = buffer;
  source.connect(audio.destination);
  source.start();
  status(`rendered 3 s in ${(performance.now() - started).toFixed(0)} ms`);
});

await init();
populate();
refresh();
