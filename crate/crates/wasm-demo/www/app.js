import init, { solve, serviceDensity, meanSizeCurve } from './pkg/erlang_queue_wasm.js';

const PAD = 36;

function axes(ctx, w, h, xMax, yMax) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = '#888';
  ctx.fillStyle = '#444';
  ctx.font = '11px system-ui';
  ctx.beginPath();
  ctx.moveTo(PAD, PAD / 2);
  ctx.lineTo(PAD, h - PAD);
  ctx.lineTo(w - PAD / 2, h - PAD);
  ctx.stroke();
  ctx.fillText(yMax.toPrecision(3), 2, PAD / 2 + 8);
  ctx.fillText('0', PAD - 10, h - PAD + 12);
  ctx.fillText(String(+xMax.toPrecision(3)), w - PAD, h - PAD + 12);
}

function bars(canvas, values) {
  const ctx = canvas.getContext('2d');
  const { width: w, height: h } = canvas;
  const yMax = Math.max(...values) || 1;
  axes(ctx, w, h, values.length - 1, yMax);
  const slot = (w - PAD * 1.5) / values.length;
  ctx.fillStyle = '#3b6ea5';
  values.forEach((v, i) => {
    const bh = (v / yMax) * (h - PAD * 1.5);
    ctx.fillRect(PAD + i * slot + 1, h - PAD - bh, Math.max(slot - 2, 1), bh);
  });
}

function lines(canvas, xMin, xMax, series) {
  const ctx = canvas.getContext('2d');
  const { width: w, height: h } = canvas;
  const yMax = Math.max(...series.flatMap((s) => Array.from(s.values))) || 1;
  axes(ctx, w, h, xMax, yMax);
  ctx.fillText(String(xMin), PAD, h - PAD + 12);
  for (const { values, color } of series) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    values.forEach((v, i) => {
      const x = PAD + (i / (values.length - 1)) * (w - PAD * 1.5);
      const y = h - PAD - (v / yMax) * (h - PAD * 1.5);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
}

function readInputs() {
  const num = (id) => Number(document.getElementById(id).value);
  return {
    r: num('r'),
    c: num('c'),
    k: num('k'),
    rho: num('rho'),
    method: document.getElementById('method').value,
  };
}

function render() {
  const error = document.getElementById('error');
  const row = document.getElementById('measures');
  const { r, c, k, rho, method } = readInputs();
  error.textContent = '';
  try {
    const t0 = performance.now();
    const s = solve(r, c, k, rho, method);
    const ms = (performance.now() - t0).toFixed(1);
    const cells = [s.n_states, s.l, s.lq, s.w, s.wq, s.p_block, s.residual];
    row.innerHTML = cells
      .map((v, i) => `<td>${i === 0 ? v : i === 6 ? v.toExponential(1) : v.toFixed(4)}</td>`)
      .join('');
    error.textContent = `solved in ${ms} ms`;
    bars(document.getElementById('pn'), Array.from(s.p_n));
    s.free();

    const tMax = 3;
    lines(document.getElementById('pdf'), 0, tMax, [
      { values: serviceDensity(1, tMax, 200), color: '#aaa' },
      { values: serviceDensity(r, tMax, 200), color: '#c0392b' },
    ]);
    lines(document.getElementById('curve'), 0.05, 1.5, [
      { values: meanSizeCurve(r, c, k, 0.05, 1.5, 30), color: '#27ae60' },
    ]);
  } catch (e) {
    error.textContent = e.message ?? String(e);
  }
}

await init();
document.getElementById('controls').addEventListener('submit', (ev) => {
  ev.preventDefault();
  render();
});
render();
