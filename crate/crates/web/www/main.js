import init, { ame_curves, fixed_point_regions, ber_curves } from "./pkg/las_mud_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f"];
const $ = (id) => document.getElementById(id);

function numbers(text) {
  return text.split(",").map((s) => s.trim()).filter((s) => s.length).map(Number);
}

function legend(el, entries) {
  el.innerHTML = entries
    .map(([name, color]) => `<span><i style="background:${color}"></i>${name}</span>`)
    .join("");
}

// Line plot with linear x and linear or log10 y.
function plot(canvas, xs, series, { ymin, ymax, log = false, xlabel = "", ylabel = "" }) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 15, T = 15, B = 40;
  ctx.clearRect(0, 0, W, H);
  const ty = (v) => (log ? Math.log10(Math.max(v, 10 ** ymin)) : v);
  const px = (x) => L + ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * (W - L - R);
  const py = (v) => T + (1 - (ty(v) - ymin) / (ymax - ymin)) * (H - T - B);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  for (let i = 0; i <= 5; i++) {
    const x = xs[0] + ((xs[xs.length - 1] - xs[0]) * i) / 5;
    ctx.fillText(x.toFixed(2), px(x) - 12, H - B + 16);
  }
  const ticks = log ? Array.from({ length: ymax - ymin + 1 }, (_, i) => ymin + i) : [0, 0.25, 0.5, 0.75, 1].map((f) => ymin + f * (ymax - ymin));
  for (const t of ticks) {
    const y = T + (1 - (t - ymin) / (ymax - ymin)) * (H - T - B);
    ctx.fillText(log ? `1e${t}` : t.toFixed(2), 8, y + 4);
    ctx.beginPath();
    ctx.strokeStyle = "#eee";
    ctx.moveTo(L, y);
    ctx.lineTo(W - R, y);
    ctx.stroke();
  }
  ctx.fillText(xlabel, W / 2, H - 6);
  ctx.save();
  ctx.translate(14, H / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();

  for (const s of series) {
    ctx.beginPath();
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.setLineDash(s.dash || []);
    s.values.forEach((v, i) => (i ? ctx.lineTo(px(xs[i]), py(v)) : ctx.moveTo(px(xs[i]), py(v))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.lineWidth = 1;
}

function guarded(errEl, f) {
  return () => {
    try {
      errEl.textContent = "";
      f();
    } catch (e) {
      errEl.textContent = String(e.message || e);
    }
  };
}

const drawAme = guarded($("ame-error"), () => {
  const k = Number($("ame-k").value);
  const groups = numbers($("ame-m").value);
  const d = JSON.parse(ame_curves(k, new Uint32Array(groups), Number($("ame-rho").value), 201));
  const series = [
    { name: "GML", values: d.gml, color: COLORS[0] },
    { name: `decorrelator/MMSE, K=${k}`, values: d.decmmse, color: COLORS[1] },
    { name: `MF, K=${k}`, values: d.mf, color: COLORS[2] },
    { name: "LML bound", values: d.lml, color: COLORS[3], dash: [6, 3] },
    ...d.gplas.map((g, i) => ({ name: `GPLAS M=${g.m}`, values: g.values, color: COLORS[4 + (i % 5)], dash: [2, 3] })),
  ];
  legend($("ame-legend"), series.map((s) => [s.name, s.color]));
  plot($("ame-plot"), d.rho, series, { ymin: 0, ymax: 1, xlabel: "ρ", ylabel: "AME" });
});

const REGION_COLORS = ["#ffffff", "#cfe3f7", "#8fb8e8", "#3d7cc9", "#123f80"];
const VECTOR_COLORS = ["#f4a582", "#92c5de", "#b2df8a", "#cab2d6"];

const drawRegions = guarded($("fp-error"), () => {
  const d = JSON.parse(
    fixed_point_regions(
      Number($("fp-rho").value),
      Number($("fp-a1").value),
      Number($("fp-a2").value),
      $("fp-sched").value,
      2.5,
      210,
    ),
  );
  const canvas = $("fp-plot");
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / d.n;
  const showGml = $("fp-show").value === "gml";
  for (let r = 0; r < d.n; r++) {
    for (let c = 0; c < d.n; c++) {
      const i = r * d.n + c;
      let color;
      if (showGml) {
        color = VECTOR_COLORS[d.gml[i]];
      } else {
        let m = d.masks[i], count = 0;
        for (; m; m >>= 1) count += m & 1;
        color = REGION_COLORS[count];
      }
      ctx.fillStyle = color;
      ctx.fillRect(c * cell, r * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }
  ctx.strokeStyle = "#666";
  ctx.beginPath();
  ctx.moveTo(canvas.width / 2, 0);
  ctx.lineTo(canvas.width / 2, canvas.height);
  ctx.moveTo(0, canvas.height / 2);
  ctx.lineTo(canvas.width, canvas.height / 2);
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.fillText("y₁", canvas.width - 16, canvas.height / 2 - 4);
  ctx.fillText("y₂", canvas.width / 2 + 4, 12);
  const entries = showGml
    ? d.vectors.map((v, i) => [`b = (${v.join(", ")})`, VECTOR_COLORS[i]])
    : [1, 2, 3, 4].map((n) => [`${n} fixed point${n > 1 ? "s" : ""}`, REGION_COLORS[n]]);
  legend($("fp-legend"), [...entries, [`|y| ≤ ${d.extent}, T = (${d.thresholds.map((t) => t.toFixed(3)).join(", ")})`, "transparent"]]);
});

const drawBer = guarded($("ber-error"), () => {
  const amps = numbers($("ber-a").value);
  const dets = $("ber-d").value.split(",").map((s) => s.trim()).filter((s) => s);
  const d = JSON.parse(
    ber_curves(Number($("ber-rho").value), new Float64Array(amps), Number($("ber-lo").value), Number($("ber-hi").value), 81, dets),
  );
  const dashes = [[], [6, 3], [2, 3], [8, 2, 2, 2]];
  const series = d.curves.map((c) => ({
    name: `${c.detector}, user ${c.user}`,
    values: c.values,
    color: COLORS[(c.user - 1) % COLORS.length],
    dash: dashes[dets.indexOf(c.detector) % dashes.length],
  }));
  const all = series.flatMap((s) => s.values).filter((v) => v > 0);
  const ymin = Math.max(-12, Math.floor(Math.log10(Math.min(...all))));
  const ymax = Math.min(1, Math.ceil(Math.log10(Math.max(...all))));
  legend($("ber-legend"), [...series.map((s) => [s.name, s.color]), [`|F| = ${d.error_set_size}`, "transparent"]]);
  plot($("ber-plot"), d.snr_db, series, { ymin, ymax: Math.max(ymax, ymin + 1), log: true, xlabel: "SNR₁ (dB)", ylabel: "BER bound" });
});

await init();
for (const [ids, draw] of [
  [["ame-k", "ame-m", "ame-rho"], drawAme],
  [["fp-rho", "fp-a1", "fp-a2", "fp-sched", "fp-show"], drawRegions],
  [["ber-rho", "ber-a", "ber-lo", "ber-hi", "ber-d"], drawBer],
]) {
  ids.forEach((id) => $(id).addEventListener("change", draw));
  draw();
}
