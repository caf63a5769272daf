import init, { check, sweep_curve, apply_curve } from "./pkg/powerweight_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function params() {
  return [num("thm"), num("s1"), num("s2"), num("p1"), num("p2"), num("kappa")];
}

// series: [{xs, ys, color, label}]
function plot(canvas, series, { logx = false, logy = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 44;
  ctx.clearRect(0, 0, w, h);
  const tx = logx ? Math.log10 : (v) => v;
  const ty = logy ? Math.log10 : (v) => v;
  const pts = series.flatMap((s) => s.xs.map((x, i) => [tx(x), ty(s.ys[i])])).filter(([, y]) => Number.isFinite(y));
  if (!pts.length) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 0.5; y1 += 0.5; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  const fmt = (v, log) => (log ? "1e" + v.toFixed(1) : v.toPrecision(3));
  ctx.fillText(fmt(x0, logx), pad, h - pad + 14);
  ctx.fillText(fmt(x1, logx), w - pad - 30, h - pad + 14);
  ctx.fillText(fmt(y1, logy), 2, pad + 4);
  ctx.fillText(fmt(y0, logy), 2, h - pad);

  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    ctx.beginPath();
    s.xs.forEach((x, i) => {
      const [px, py] = [sx(tx(x)), sy(ty(s.ys[i]))];
      i ? ctx.lineTo(px, py) : ctx.moveTo(px, py);
    });
    ctx.stroke();
    if (s.dots) s.xs.forEach((x, i) => ctx.fillRect(sx(tx(x)) - 2, sy(ty(s.ys[i])) - 2, 5, 5));
    ctx.fillText(s.label, w - pad - 120, pad + 14 + 14 * k);
  });
}

function updateCheck() {
  const out = $("verdict");
  try {
    const r = JSON.parse(check(...params()));
    const status = !r.applicable ? "inapplicable (s1 >= 0)" : r.satisfied ? "satisfied" : "not satisfied";
    out.className = r.satisfied ? "ok" : "bad";
    out.textContent =
      `${r.query_text}: ${status}; threshold ${r.threshold.toFixed(4)} ` +
      `(inner ${r.inner_threshold.toFixed(4)}, outer ${r.outer_threshold.toFixed(4)}, ${r.binding} binds), ` +
      `margin ${r.margin.toFixed(4)}`;
  } catch (e) {
    out.className = "bad";
    out.textContent = e.message;
  }
}

function runSweep() {
  const info = $("sweep-info");
  try {
    const r = JSON.parse(sweep_curve(...params(), num("rmax")));
    info.textContent = `gamma ${r.gamma === null ? "n/a" : r.gamma.toFixed(4)}, ${r.verdict}` +
      (r.certified ? "" : " (lower bounds only)");
    plot($("sweep-plot"), [{ xs: r.radii, ys: r.norms, color: "#1f5fa8", label: "norm vs R", dots: true }], {
      logx: true,
      logy: true,
    });
  } catch (e) {
    info.textContent = e.message;
  }
}

function runApply() {
  const info = $("apply-info");
  try {
    const r = JSON.parse(apply_curve($("kernel").value, $("function").value, num("xmax"), 401));
    info.textContent = `${r.kernel} applied to ${r.function}`;
    plot($("apply-plot"), [
      { xs: r.x, ys: r.f, color: "#aaa", label: "f" },
      { xs: r.x, ys: r.kf, color: "#b3461b", label: "Kf" },
    ]);
  } catch (e) {
    info.textContent = e.message;
  }
}

await init();
for (const id of ["thm", "s1", "s2", "p1", "p2", "kappa"]) $(id).addEventListener("input", updateCheck);
$("run-sweep").addEventListener("click", runSweep);
$("run-apply").addEventListener("click", runApply);
updateCheck();
runApply();
