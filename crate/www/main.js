import init, { generate, throughput_field, place } from "./pkg/risuav_wasm.js";

const $ = (id) => document.getElementById(id);
const canvas = $("view");
const ctx = canvas.getContext("2d");

let scenario = null;
let scenarioJson = null;
let field = null;
let placement = null;

function num(id) {
  return Number($(id).value);
}

function status(msg) {
  $("status").textContent = msg;
}

function toCanvas(x, y) {
  const r = scenario.region;
  const sx = canvas.width / (r.x_hi - r.x_lo);
  const sy = canvas.height / (r.y_hi - r.y_lo);
  return [(x - r.x_lo) * sx, canvas.height - (y - r.y_lo) * sy];
}

function color(t) {
  // Dark blue through teal to yellow.
  const stops = [[20, 30, 90], [30, 140, 140], [250, 230, 80]];
  const u = Math.min(1, Math.max(0, t)) * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(u));
  const f = u - i;
  const c = stops[i].map((v, k) => Math.round(v + f * (stops[i + 1][k] - v)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function dot(x, y, r, fill) {
  const [px, py] = toCanvas(x, y);
  ctx.beginPath();
  ctx.arc(px, py, r, 0, 2 * Math.PI);
  ctx.fillStyle = fill;
  ctx.fill();
}

function drawField() {
  if (!field) {
    ctx.fillStyle = "#f4f4f4";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    return;
  }
  const { nx, ny, values, res } = field;
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const span = hi > lo ? hi - lo : 1;
  const r = scenario.region;
  const w = (res * canvas.width) / (r.x_hi - r.x_lo);
  const h = (res * canvas.height) / (r.y_hi - r.y_lo);
  for (let j = 0; j < ny; j++) {
    for (let i = 0; i < nx; i++) {
      const [px, py] = toCanvas(r.x_lo + i * res, r.y_lo + j * res);
      ctx.fillStyle = color((values[j * nx + i] - lo) / span);
      ctx.fillRect(px - w / 2, py - h / 2, w + 1, h + 1);
    }
  }
  status(`${field.quantity}: ${lo.toFixed(3)} to ${hi.toFixed(3)}`);
}

function drawTrace(trace, stroke) {
  if (trace.length < 2) return;
  ctx.beginPath();
  trace.forEach(([x, y], i) => {
    const [px, py] = toCanvas(x, y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.strokeStyle = stroke;
  ctx.lineWidth = 1.5;
  ctx.stroke();
}

function draw() {
  if (!scenario) return;
  drawField();
  for (const o of scenario.obstacles) {
    const [x0, y0] = toCanvas(o.x_min, o.y_max);
    const [x1, y1] = toCanvas(o.x_max, o.y_min);
    ctx.fillStyle = "rgba(90,90,90,0.55)";
    ctx.fillRect(x0, y0, x1 - x0, y1 - y0);
  }
  ctx.strokeStyle = "rgba(21,101,192,0.5)";
  ctx.lineWidth = 1;
  for (const p of scenario.d2d_pairs) {
    const [ax, ay] = toCanvas(p.tx.x, p.tx.y);
    const [bx, by] = toCanvas(p.rx.x, p.rx.y);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
    dot(p.tx.x, p.tx.y, 2.5, "#1565c0");
    dot(p.rx.x, p.rx.y, 2.5, "#1565c0");
  }
  for (const c of scenario.cus) dot(c.x, c.y, 3.5, "#2e7d32");
  if (placement) {
    drawTrace(placement.d2d.trace, "#ff6f00");
    drawTrace(placement.cu.trace, "#6a1b9a");
    dot(placement.d2d.x, placement.d2d.y, 6, "#ff6f00");
    dot(placement.cu.x, placement.cu.y, 6, "#6a1b9a");
    dot(placement.joint.x, placement.joint.y, 7, "#d50000");
  }
}

function showResults() {
  const rows = placement.schemes
    .map(
      (s) =>
        `<tr><th>${s.scheme}</th><td>${s.x.toFixed(1)}</td><td>${s.y.toFixed(1)}</td>` +
        `<td>${s.d2d_total.toFixed(2)}</td><td>${s.cu_total.toFixed(2)}</td>` +
        `<td>${s.net.toFixed(2)}</td><td>${s.jain.toFixed(4)}</td><td>${s.t_value.toFixed(4)}</td></tr>`
    )
    .join("");
  $("results").innerHTML =
    "<tr><th></th><th>x</th><th>y</th><th>D2D</th><th>CU</th><th>net</th><th>Jain</th><th>T</th></tr>" +
    rows;
}

function run(action) {
  try {
    action();
  } catch (e) {
    status(String(e));
  }
}

function onGenerate() {
  run(() => {
    scenarioJson = generate(num("seed"), num("pairs"), num("cus"), num("obstacles"), num("k"));
    scenario = JSON.parse(scenarioJson);
    field = null;
    placement = null;
    $("results").innerHTML = "";
    status(`${scenario.d2d_pairs.length} pairs, ${scenario.cus.length} CUs, ${scenario.obstacles.length} obstacles`);
    draw();
  });
}

function onField() {
  if (!scenarioJson) onGenerate();
  run(() => {
    const res = num("resolution");
    const quantity = $("quantity").value;
    const raw = throughput_field(scenarioJson, quantity, res, $("mode").value, num("seed"));
    field = { nx: raw[0], ny: raw[1], values: raw.slice(2), res, quantity };
    draw();
  });
}

function onPlace() {
  if (!scenarioJson) onGenerate();
  status("placing...");
  setTimeout(() =>
    run(() => {
      const text = place(scenarioJson, num("lr"), num("dirs"), num("steps"), $("mode").value, num("seed"));
      placement = JSON.parse(text);
      showResults();
      draw();
      status(
        `D2D-only ${placement.d2d.iterations} iters (${placement.d2d.stop_reason}), ` +
          `CU-only ${placement.cu.iterations} iters (${placement.cu.stop_reason}), phi ${placement.phi.toFixed(3)}`
      );
    })
  );
}

await init();
$("generate").addEventListener("click", onGenerate);
$("field").addEventListener("click", onField);
$("place").addEventListener("click", onPlace);
onGenerate();
onField();
