import init, { Scene, probe_ring, ring_layout } from "./pkg/ovc_web.js";

const W = 320, H = 240;
const $ = (id) => document.getElementById(id);
let scene;

await init();

const layout = ring_layout();
const ringInputs = [];
const grid = $("ring");
const centerInput = cell(4, 4, "center");
for (let i = 0; i < 16; i++) {
  ringInputs.push(cell(layout[2 * i] + 4, layout[2 * i + 1] + 4, ""));
}

function cell(col, row, cls) {
  const el = document.createElement("input");
  el.type = "number";
  el.min = 0;
  el.max = 255;
  el.value = 128;
  el.className = cls;
  el.style.gridColumn = col;
  el.style.gridRow = row;
  el.addEventListener("input", probe);
  grid.appendChild(el);
  return el;
}

function threshold() {
  return Number($("threshold").value);
}

function probe() {
  const t = threshold();
  const center = Number(centerInput.value) & 255;
  const ring = Uint8Array.from(ringInputs, (el) => Number(el.value) & 255);
  const [verdict, score] = probe_ring(center, ring, t);
  ringInputs.forEach((el, i) => {
    const d = ring[i] - center;
    el.className = d > t ? "over" : d < -t ? "under" : "";
  });
  const name = ["no corner", "bright corner", "dark corner"][verdict + 1];
  $("verdict").textContent = `${name} at t=${t}; score ${score}`;
}

function regenerate() {
  scene = new Scene(BigInt($("seed").value || 0), W, H, Number($("motifs").value));
  detect();
}

function detect() {
  const t0 = performance.now();
  const corners = scene.detect(threshold(), Number($("lanes").value));
  const ms = performance.now() - t0;
  draw(corners);
  $("stats").textContent =
    `corners     ${corners.length / 4}\n` +
    `detect+nms  ${ms.toFixed(1)} ms\n` +
    `bundle      ${scene.bundle_bytes()} bytes`;
}

function draw(corners) {
  const canvas = $("view");
  canvas.width = W;
  canvas.height = H;
  const ctx = canvas.getContext("2d");
  const gray = $("showmap").checked ? scene.score_map() : scene.pixels();
  const img = ctx.createImageData(W, H);
  for (let i = 0; i < gray.length; i++) {
    img.data[4 * i] = img.data[4 * i + 1] = img.data[4 * i + 2] = gray[i];
    img.data[4 * i + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
  ctx.lineWidth = 0.6;
  for (let i = 0; i < corners.length; i += 4) {
    ctx.strokeStyle = corners[i + 3] === 0 ? "#f6ad55" : "#4299e1";
    ctx.strokeRect(corners[i] - 2.5, corners[i + 1] - 2.5, 6, 6);
  }
}

$("view").addEventListener("click", (e) => {
  const r = e.target.getBoundingClientRect();
  const x = Math.floor(((e.clientX - r.left) * W) / r.width);
  const y = Math.floor(((e.clientY - r.top) * H) / r.height);
  if (e.altKey) {
    const ring = scene.ring_at(x, y);
    if (ring.length === 17) {
      centerInput.value = ring[0];
      ringInputs.forEach((el, i) => (el.value = ring[i + 1]));
      probe();
    }
    return;
  }
  if (scene.stamp(x, y, e.shiftKey ? 100 : -100)) detect();
});

$("threshold").addEventListener("input", () => {
  $("tval").textContent = threshold();
  detect();
  probe();
});
$("lanes").addEventListener("change", detect);
$("showmap").addEventListener("change", detect);
$("regen").addEventListener("click", regenerate);

regenerate();
probe();
