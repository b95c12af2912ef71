import init, { revenueCurve, hazardCompare, targetingCurve } from "./pkg/auction_lab_demo.js";

const $ = (id) => document.getElementById(id);

// Draws each series as a polyline on shared axes fitted to all finite points.
function plot(canvas, xs, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const ys = series.flatMap((s) => s.ys).filter((y) => y !== null && Number.isFinite(y));
  if (!ys.length) return;
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-12) { y0 -= 1; y1 += 1; }
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - pad + 14);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 1.5;
    ctx.beginPath();
    let pen = false;
    s.ys.forEach((y, i) => {
      if (y === null || !Number.isFinite(y)) { pen = false; return; }
      if (pen) ctx.lineTo(sx(xs[i]), sy(y)); else ctx.moveTo(sx(xs[i]), sy(y));
      pen = true;
    });
    ctx.stroke();
  }
}

function guard(outId, f) {
  const out = $(outId);
  try {
    out.className = "out";
    f(out);
  } catch (e) {
    out.className = "out err";
    out.textContent = String(e);
  }
}

function drawCurve() {
  const w = Number($("curve-w").value);
  $("curve-w-val").textContent = w.toFixed(2);
  guard("curve-out", (out) => {
    const r = JSON.parse(revenueCurve($("curve-a").value, $("curve-b").value, w));
    plot($("curve-plot"), r.q, [
      { ys: r.raw, color: "#999", width: 3 },
      { ys: r.hull, color: "#d33" },
    ]);
    out.textContent = `largest hull gap ${r.max_gap.toPrecision(4)}` +
      (r.max_gap > 1e-9 ? " (ironed)" : " (regular on this grid)");
  });
}

function drawHazard() {
  guard("hr-out", (out) => {
    const r = JSON.parse(hazardCompare($("hr-a").value, $("hr-b").value));
    // clip the plot so a vanishing survival does not flatten everything else
    const finite = [...r.first, ...r.second].filter((y) => y !== null).sort((a, b) => a - b);
    const cap = finite[Math.floor(0.95 * (finite.length - 1))] * 1.5;
    const clip = (ys) => ys.map((y) => (y === null || y > cap ? null : y));
    plot($("hr-plot"), r.x, [
      { ys: clip(r.first), color: "#36c" },
      { ys: clip(r.second), color: "#d33" },
    ]);
    const verdict = r.first_dominates ? "first dominates second (lower hazard throughout)"
      : r.second_dominates ? "second dominates first (lower hazard throughout)"
      : `neither dominates; hazards cross near ${r.crossing?.toPrecision(4)}`;
    out.textContent = verdict;
  });
}

function drawTargeting() {
  const n = Number($("tg-n").value);
  $("tg-n-val").textContent = n;
  guard("tg-out", (out) => {
    const rows = JSON.parse(targetingCurve(n));
    const xs = rows.map((r) => r.n);
    plot($("tg-plot"), xs, [
      { ys: rows.map((r) => r.opt), color: "#222" },
      { ys: rows.map((r) => r.targeted), color: "#2a2" },
      { ys: rows.map((r) => r.nontargeted), color: "#d33" },
    ]);
    const last = rows[rows.length - 1];
    out.textContent = `n = ${last.n}: optimal ${last.opt.toFixed(3)}, targeted ${last.targeted.toFixed(3)}, ` +
      `non-targeted ${last.nontargeted.toFixed(3)} (${(100 * last.nontargeted / last.opt).toFixed(1)}% of optimal)`;
  });
}

await init();
for (const id of ["curve-a", "curve-b"]) $(id).addEventListener("change", drawCurve);
$("curve-w").addEventListener("input", drawCurve);
$("hr-run").addEventListener("click", drawHazard);
$("tg-n").addEventListener("input", drawTargeting);
drawCurve();
drawHazard();
drawTargeting();
