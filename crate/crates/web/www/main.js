import init, { quench_curves, steady_entanglement, witness_bounds } from "./pkg/qchain_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const num = (id) => parseFloat(document.getElementById(id).value);

function plot(canvas, xs, series, xlabel) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 45;
  ctx.clearRect(0, 0, w, h);
  const finite = series.flatMap((s) => s.values).filter(Number.isFinite);
  const ymax = Math.max(1e-3, ...finite) * 1.05;
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  const sx = (x) => pad + ((x - xmin) / (xmax - xmin || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - (y / ymax) * (h - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(xmin.toPrecision(3), pad, h - pad + 15);
  ctx.fillText(xmax.toPrecision(3), w - pad - 20, h - pad + 15);
  ctx.fillText(ymax.toPrecision(3), 5, pad + 4);
  ctx.fillText(xlabel, w / 2, h - 10);
  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.beginPath();
    let pen = false;
    xs.forEach((x, i) => {
      const y = s.values[i];
      if (!Number.isFinite(y)) { pen = false; return; }
      pen ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y));
      pen = true;
    });
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(s.label, w - pad - 90, pad + 15 + 14 * k);
  });
}

function guarded(msgId, f) {
  const msg = document.getElementById(msgId);
  msg.className = "";
  msg.textContent = "running…";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      f();
      msg.textContent = `${((performance.now() - t0) / 1000).toFixed(2)} s`;
    } catch (e) {
      msg.className = "err";
      msg.textContent = String(e);
    }
  }, 10);
}

function runQuench() {
  const n = num("q-n"), points = 201;
  const out = quench_curves(n, num("q-delta"), num("q-kini"), num("q-kfin"), num("q-gamma"), num("q-nt"), num("q-tmax"), points);
  const slice = (k) => Array.from(out.subarray(k * points, (k + 1) * points));
  const labels = ["E_N(1,2)", "E_N(1,3)", `E_N(1,${n})`];
  plot(document.getElementById("q-plot"), slice(0), labels.map((label, k) => ({ label, values: slice(k + 1) })), "t");
}

function runSteady() {
  const gammas = document.getElementById("s-gammas").value.split(",").map(Number);
  const out = steady_entanglement(num("s-n"), 0.1, num("s-kd"), num("s-nt"), Float64Array.from(gammas));
  const values = Array.from(out.subarray(0, gammas.length));
  const unconverged = gammas.filter((_, i) => out[gammas.length + i] === 0).length;
  plot(document.getElementById("s-plot"), gammas, [{ label: "steady E_N(1,2)", values }], "Γ");
  if (unconverged) throw new Error(`${unconverged} point(s) did not converge`);
}

function buildTable() {
  const table = document.getElementById("b-x");
  const axes = ["x", "y", "z"];
  const bell = [[1, 0, 0], [0, 1, 0], [0, 0, -1]];
  table.innerHTML = "<tr><th></th>" + axes.map((a) => `<th>${a}</th>`).join("") + "</tr>" +
    axes.map((a, r) => `<tr><th>${a}</th>` +
      axes.map((_, c) => `<td><input type="number" step="0.05" id="x${r}${c}" value="${bell[r][c]}"></td>`).join("") +
      "</tr>").join("");
}

function runBounds() {
  const out = document.getElementById("b-out");
  try {
    const x = [];
    for (let r = 0; r < 3; r++) for (let c = 0; c < 3; c++) x.push(num(`x${r}${c}`));
    const [c1, c2, opt] = witness_bounds(Float64Array.from(x));
    const optText = Number.isNaN(opt) ? "refused (matrix not symmetric)" : opt.toFixed(4);
    out.className = "";
    out.textContent = `C1 = ${c1.toFixed(4)}, C2 = ${c2.toFixed(4)}, optimized C2 = ${optText}`;
  } catch (e) {
    out.className = "err";
    out.textContent = String(e);
  }
}

await init();
buildTable();
document.getElementById("q-run").onclick = () => guarded("q-msg", runQuench);
document.getElementById("s-run").onclick = () => guarded("s-msg", runSteady);
document.getElementById("b-run").onclick = runBounds;
runBounds();
