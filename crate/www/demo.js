import init, { bounds_panel, surface_panel, sce_panel } from "./pkg/gse_wasm_demo.js";

const status = document.getElementById("status");

// ---------- small plotting helpers ----------

function clearCanvas(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function niceLogTicks(lo, hi) {
  const ticks = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

// Log-y line plot with a shared x grid.
function drawCurves(canvas, xs, curves, xLabel) {
  const ctx = clearCanvas(canvas);
  const W = canvas.width, H = canvas.height;
  const m = { l: 70, r: 16, t: 14, b: 44 };

  let lo = Infinity, hi = -Infinity;
  for (const c of curves) {
    for (const v of c.values) {
      if (Number.isFinite(v) && v > 0) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
    }
  }
  if (!(lo < hi)) { lo = 1e-3; hi = 1; }
  lo /= 1.3; hi *= 1.3;

  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const px = x => m.l + (x - x0) / (x1 - x0) * (W - m.l - m.r);
  const py = v => m.t + (Math.log10(hi) - Math.log10(v)) / (Math.log10(hi) - Math.log10(lo)) * (H - m.t - m.b);

  ctx.strokeStyle = "#e3e8ed";
  ctx.fillStyle = "#5d6873";
  ctx.font = "12px system-ui";
  ctx.textAlign = "right";
  for (const t of niceLogTicks(lo, hi)) {
    if (t < lo || t > hi) continue;
    ctx.beginPath(); ctx.moveTo(m.l, py(t)); ctx.lineTo(W - m.r, py(t)); ctx.stroke();
    ctx.fillText(t.toExponential(0), m.l - 6, py(t) + 4);
  }
  ctx.textAlign = "center";
  const xticks = 8;
  for (let i = 0; i <= xticks; i++) {
    const x = x0 + (x1 - x0) * i / xticks;
    ctx.fillText(x.toFixed(0), px(x), H - m.b + 18);
  }
  ctx.fillText(xLabel, (m.l + W - m.r) / 2, H - 8);

  let legendY = m.t + 8;
  for (const c of curves) {
    ctx.strokeStyle = c.color;
    ctx.setLineDash(c.dash || []);
    ctx.lineWidth = c.width || 1.8;
    ctx.beginPath();
    let started = false;
    for (let i = 0; i < xs.length; i++) {
      const v = c.values[i];
      if (!Number.isFinite(v) || v <= 0) continue;
      if (!started) { ctx.moveTo(px(xs[i]), py(v)); started = true; }
      else ctx.lineTo(px(xs[i]), py(v));
    }
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = c.color;
    ctx.textAlign = "left";
    ctx.fillText(c.label, W - 230, legendY += 16);
  }
  ctx.lineWidth = 1;
}

// ---------- panel 1: bounds ----------

function renderBounds() {
  const rate = +document.getElementById("b-rate").value;
  const taps = +document.getElementById("b-taps").value;
  const trials = +document.getElementById("b-trials").value;
  const seed = BigInt(document.getElementById("b-seed").value || "1");
  document.getElementById("b-rate-out").value = rate.toFixed(2);
  document.getElementById("b-taps-out").value = taps;
  document.getElementById("b-trials-out").value = trials;

  const data = JSON.parse(bounds_panel(seed, 0, 16, 9, taps, rate, trials));
  const palette = { 1: "#d1495b", 2: "#e08a2e", 10: "#3e7cb1", [taps]: "#2a9d8f" };
  const curves = [{ label: "unbiased floor", color: "#222", width: 2.4, values: data.crlb }];
  for (const b of data.bounds) {
    curves.push({
      label: `floor, ${b.groups === taps ? "all " : ""}${b.groups} group${b.groups > 1 ? "s" : ""}`,
      color: palette[b.groups] || "#888",
      values: b.values,
    });
  }
  drawCurves(document.getElementById("bounds-canvas"), data.snr_db, curves, "SNR (dB)");
}

// ---------- panel 2: surface ----------

function renderSurface() {
  const split = +document.getElementById("s-split").value;
  const sigma = +document.getElementById("s-sigma").value;
  document.getElementById("s-split-out").value = split.toFixed(2);
  document.getElementById("s-sigma-out").value = sigma.toFixed(2);

  const data = JSON.parse(surface_panel(split, sigma, 0.01));
  const k = data.factors.length;
  const canvas = document.getElementById("surface-canvas");
  const ctx = clearCanvas(canvas);
  const W = canvas.width, H = canvas.height;
  const m = { l: 70, r: 160, t: 14, b: 44 };
  const plotW = W - m.l - m.r, plotH = H - m.t - m.b;

  let lo = Infinity, hi = -Infinity;
  for (const v of data.values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const span = Math.max(hi, -lo, 1e-12);

  // Diverging colormap around zero: blue negative (improvement), red positive.
  const img = ctx.createImageData(k, k);
  for (let i = 0; i < k; i++) {        // sf1 on x
    for (let j = 0; j < k; j++) {      // sf2 on y (upward)
      const v = data.values[i * k + j] / span;
      const p = ((k - 1 - j) * k + i) * 4;
      if (v < 0) {
        const t = Math.min(1, -v);
        img.data[p] = 245 - 190 * t; img.data[p + 1] = 247 - 130 * t; img.data[p + 2] = 250 - 60 * t;
      } else {
        const t = Math.min(1, v);
        img.data[p] = 245 + 8 * t; img.data[p + 1] = 247 - 170 * t; img.data[p + 2] = 250 - 180 * t;
      }
      img.data[p + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(k, k);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(off, m.l, m.t, plotW, plotH);

  // Axes.
  ctx.fillStyle = "#5d6873"; ctx.font = "12px system-ui"; ctx.textAlign = "center";
  for (let t = 0; t <= 1.001; t += 0.2) {
    ctx.fillText(t.toFixed(1), m.l + t * plotW, H - m.b + 18);
    ctx.textAlign = "right";
    ctx.fillText(t.toFixed(1), m.l - 8, m.t + (1 - t) * plotH + 4);
    ctx.textAlign = "center";
  }
  ctx.fillText("shrinkage factor, group 1", m.l + plotW / 2, H - 8);
  ctx.save();
  ctx.translate(16, m.t + plotH / 2); ctx.rotate(-Math.PI / 2);
  ctx.fillText("shrinkage factor, group 2", 0, 0);
  ctx.restore();

  // Optimum marker.
  const ox = m.l + data.optimum[0] * plotW;
  const oy = m.t + (1 - data.optimum[1]) * plotH;
  ctx.fillStyle = "#111";
  ctx.beginPath(); ctx.arc(ox, oy, 5, 0, 2 * Math.PI); ctx.fill();
  ctx.strokeStyle = "#fff"; ctx.lineWidth = 1.5; ctx.stroke();

  ctx.fillStyle = "#1c2530"; ctx.textAlign = "left";
  ctx.fillText(`optimum (${data.optimum[0].toFixed(2)}, ${data.optimum[1].toFixed(2)})`, W - m.r + 12, m.t + 20);
  ctx.fillText(`gain at optimum ${data.minimum_value.toExponential(2)}`, W - m.r + 12, m.t + 40);
  ctx.fillText(`unbiased MSE ${data.unbiased_mse.toFixed(2)}`, W - m.r + 12, m.t + 60);
}

// ---------- panel 3: convergence ----------

function renderConvergence() {
  const snr = +document.getElementById("c-snr").value;
  const blocks = +document.getElementById("c-blocks").value;
  const rate = +document.getElementById("c-rate").value;
  const seed = BigInt(document.getElementById("c-seed").value || "1");
  document.getElementById("c-snr-out").value = snr;
  document.getElementById("c-blocks-out").value = blocks;
  document.getElementById("c-rate-out").value = rate.toFixed(2);

  const data = JSON.parse(sce_panel(seed, snr, blocks, 24, rate));
  const xs = Array.from({ length: data.blocks }, (_, i) => i + 1);
  const style = {
    "rls mse": { label: "RLS", color: "#222", width: 2.2 },
    "gse-eb-s1 mse": { label: "shrinkage, 1 group", color: "#e08a2e" },
    "gse-eb-s24 mse": { label: "shrinkage, per tap", color: "#3e7cb1" },
    "gse-at-s24 mse": { label: "auto-tuned, per tap", color: "#2a9d8f" },
  };
  const curves = [];
  for (const c of data.curves) {
    const s = style[c.name] || { label: c.name, color: "#888" };
    curves.push({ ...s, values: c.values });
  }
  for (const r of data.references) {
    if (r.name === "analytic rls-variance") {
      // Expand the sampled reference onto the dense block grid.
      const dense = new Array(data.blocks).fill(NaN);
      const bs = r.blocks || xs;
      bs.forEach((b, i) => { dense[b - 1] = r.values[i]; });
      for (let i = 1; i < dense.length; i++) if (!Number.isFinite(dense[i])) dense[i] = dense[i - 1];
      curves.push({ label: "RLS variance (exact)", color: "#999", dash: [6, 4], values: dense });
    }
  }
  drawCurves(document.getElementById("conv-canvas"), xs, curves, "training block");
}

// ---------- wiring ----------

const debounce = (fn, ms) => {
  let id;
  return () => { clearTimeout(id); id = setTimeout(fn, ms); };
};

async function main() {
  await init();
  status.textContent = "";
  const hooks = [
    [["b-rate", "b-taps", "b-trials", "b-seed"], renderBounds],
    [["s-split", "s-sigma"], renderSurface],
    [["c-snr", "c-blocks", "c-rate", "c-seed"], renderConvergence],
  ];
  for (const [ids, render] of hooks) {
    const go = debounce(render, 120);
    for (const id of ids) document.getElementById(id).addEventListener("input", go);
    render();
  }
}

main().catch(e => { status.textContent = `Failed to start: ${e}`; });
