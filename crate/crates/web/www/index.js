import init, { geniePolicy, throughputCurves, beliefTrace } from "./pkg/ehra_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function params() {
  return { n: num("n"), ph: num("ph"), pl: num("pl"), ptx: num("ptx"), lambda: num("lambda") };
}

function call(f) {
  try {
    $("error").textContent = "";
    return JSON.parse(f());
  } catch (e) {
    $("error").textContent = String(e.message || e);
    return null;
  }
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
}

function plot(canvas, series, xmax, ymax, marks = []) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  axes(ctx, w, h, pad);
  const sx = (x) => pad + (x / xmax) * (w - 1.5 * pad);
  const sy = (y) => h - pad - (y / ymax) * (h - 1.5 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(ymax.toPrecision(3), 2, sy(ymax) + 4);
  ctx.fillText(xmax.toPrecision(3), sx(xmax) - 20, h - pad + 14);
  for (const x of marks) {
    ctx.strokeStyle = "#ccc";
    ctx.beginPath();
    ctx.moveTo(sx(x), sy(0));
    ctx.lineTo(sx(x), sy(ymax));
    ctx.stroke();
  }
  series.forEach(({ xs, ys, color, label, step }, k) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ys.forEach((y, i) => {
      const x = sx(xs[i]);
      if (i === 0) ctx.moveTo(x, sy(y));
      else if (step) { ctx.lineTo(x, sy(ys[i - 1])); ctx.lineTo(x, sy(y)); }
      else ctx.lineTo(x, sy(y));
    });
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(label, w - 160, 16 + 14 * k);
  });
}

function drawPolicy() {
  const p = params();
  const v = call(() => geniePolicy(p.n, p.ph, p.pl, p.lambda, p.ptx));
  if (!v) return;
  const ms = v.mu_genie.map((_, i) => i + 1);
  plot($("policy"), [
    { xs: ms, ys: v.mu_genie, color: "#c33", label: "genie mu(m)" },
    { xs: ms, ys: ms.map(() => v.mu_local), color: "#36c", label: "local mu_H" },
  ], p.n, 1);
  $("policy-info").textContent =
    `regime ${v.regime}  phi ${v.phi.toFixed(6)}  lambda_H,max ${v.lambda_h_max.toFixed(6)}\n` +
    `throughput genie ${v.r_genie.toFixed(6)}  local ${v.r_local.toFixed(6)}`;
}

function drawCurves() {
  const p = params();
  const v = call(() => throughputCurves(p.n, p.ph, p.pl, p.ptx, 60));
  if (!v) return;
  const xmax = v.lambda_high[v.lambda_high.length - 1];
  const ymax = Math.max(...v.r_genie) * 1.1;
  plot($("curves"), [
    { xs: v.lambda_high, ys: v.r_genie, color: "#c33", label: "genie" },
    { xs: v.lambda_high, ys: v.r_local, color: "#36c", label: "local" },
  ], xmax, ymax, [v.lambda_h_max, p.lambda]);
}

function drawTrace() {
  const p = params();
  const v = call(() => beliefTrace(p.n, p.ph, p.pl, p.lambda, p.ptx, num("slots"), num("seed")));
  if (!v) return;
  const xs = v.active.map((_, i) => i);
  plot($("trace"), [
    { xs, ys: v.active, color: "#888", label: "active nodes", step: true },
    { xs, ys: v.belief_mean, color: "#c33", label: "posterior mean" },
  ], xs.length, Math.max(1, ...v.active) * 1.1);
  $("trace-info").textContent = `empirical throughput ${v.throughput.toFixed(5)}`;
}

function refresh() {
  $("lambda-val").textContent = $("lambda").value;
  drawPolicy();
  drawCurves();
}

await init();
for (const id of ["n", "ph", "pl", "ptx", "lambda"]) $(id).addEventListener("input", refresh);
$("run-trace").addEventListener("click", drawTrace);
refresh();
drawTrace();
