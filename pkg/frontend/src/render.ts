/**
 * Pure view: CockpitState -> HTML string. No DOM access, no randomness, no
 * clocks, so rendering a recorded message log is reproducible byte for
 * byte (snapshot-tested). The host page assigns the string to a container.
 */

import type { Region, ScenarioDict, Vec2 } from "./protocol";
import type { CockpitState, TrailPoint } from "./state";
import { keepOutRegions } from "./state";

const TRAIL_MAX_POINTS = 1200;

function esc(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function fmt(x: number | null | undefined, digits = 2): string {
  if (x === null || x === undefined || !Number.isFinite(x)) return "—";
  return x.toFixed(digits);
}

// world y grows up, svg y grows down
function sx(p: Vec2): number {
  return p[0];
}
function sy(p: Vec2): number {
  return -p[1];
}

function centroid(r: Region): Vec2 {
  if ("disk" in r) return r.disk.center;
  const vs = r.polygon;
  let cx = 0;
  let cy = 0;
  for (const v of vs) {
    cx += v[0];
    cy += v[1];
  }
  return [cx / vs.length, cy / vs.length];
}

function bounds(sc: ScenarioDict): { x0: number; y0: number; w: number; h: number } {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  const take = (x: number, y: number) => {
    xMin = Math.min(xMin, x);
    xMax = Math.max(xMax, x);
    yMin = Math.min(yMin, y);
    yMax = Math.max(yMax, y);
  };
  for (const r of sc.regions) {
    if ("disk" in r) {
      const [cx, cy] = r.disk.center;
      take(cx - r.disk.radius, cy - r.disk.radius);
      take(cx + r.disk.radius, cy + r.disk.radius);
    } else {
      for (const v of r.polygon) take(v[0], v[1]);
    }
  }
  const m = 1.5;
  return {
    x0: xMin - m,
    y0: -(yMax + m),
    w: xMax - xMin + 2 * m,
    h: yMax - yMin + 2 * m,
  };
}

function regionSvg(r: Region, cls: string): string {
  const label = `${r.id}${r.labels.length ? " · " + r.labels.join(",") : ""}`;
  const c = centroid(r);
  let shape: string;
  if ("disk" in r) {
    shape =
      `<circle class="${cls}" cx="${fmt(sx(r.disk.center))}" ` +
      `cy="${fmt(sy(r.disk.center))}" r="${fmt(r.disk.radius)}"/>`;
  } else {
    const pts = r.polygon.map((v) => `${fmt(sx(v))},${fmt(sy(v))}`).join(" ");
    shape = `<polygon class="${cls}" points="${pts}"/>`;
  }
  const text =
    `<text class="region-label" x="${fmt(sx(c))}" y="${fmt(sy(c))}">` +
    `${esc(label)}</text>`;
  return shape + text;
}

function trailSvg(trail: TrailPoint[]): string {
  if (trail.length < 2) return "";
  const stride = Math.max(1, Math.floor(trail.length / TRAIL_MAX_POINTS));
  const pts: TrailPoint[] = [];
  for (let i = 0; i < trail.length; i += stride) pts.push(trail[i]!);
  const last = trail[trail.length - 1]!;
  if (pts[pts.length - 1] !== last) pts.push(last);

  // split into maximal runs of equal authority class
  const parts: string[] = [];
  let run: TrailPoint[] = [pts[0]!];
  const flush = () => {
    if (run.length < 2) return;
    const cls = run[0]!.guided ? "trail guided" : "trail auto";
    const d = run.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.x))}`).join(" ");
    parts.push(`<polyline class="${cls}" points="${d}"/>`);
  };
  for (let i = 1; i < pts.length; i++) {
    const p = pts[i]!;
    if (p.guided !== run[0]!.guided) {
      run.push(p); // close the segment at the switch point
      flush();
      run = [p];
    } else {
      run.push(p);
    }
  }
  flush();
  return parts.join("");
}

function mapSvg(s: CockpitState): string {
  const sc = s.scenario;
  if (!sc) return '<svg class="map"></svg>';
  const hardOut = new Set(keepOutRegions(sc.phi_hard));
  const softOut = new Set(keepOutRegions(sc.phi_soft));
  const b = bounds(sc);
  const byId = new Map(sc.regions.map((r) => [r.id, r]));

  const edges = sc.edges
    .map((e) => {
      const a = byId.get(e.from);
      const z = byId.get(e.to);
      if (!a || !z) return "";
      const ca = centroid(a);
      const cz = centroid(z);
      return (
        `<line class="edge" x1="${fmt(sx(ca))}" y1="${fmt(sy(ca))}" ` +
        `x2="${fmt(sx(cz))}" y2="${fmt(sy(cz))}"/>`
      );
    })
    .join("");

  const discovered = s.discovered
    .map((d) => {
      const a = byId.get(d.frm);
      const z = byId.get(d.to);
      if (!a || !z) return "";
      const ca = centroid(a);
      const cz = centroid(z);
      return (
        `<line class="edge discovered" x1="${fmt(sx(ca))}" y1="${fmt(sy(ca))}" ` +
        `x2="${fmt(sx(cz))}" y2="${fmt(sy(cz))}"/>`
      );
    })
    .join("");

  const regions = sc.regions
    .map((r) => {
      let cls = "region";
      if (hardOut.has(r.id)) cls += " keepout";
      if (softOut.has(r.id)) cls += " soft-keepout";
      if (r.id === sc.initial) cls += " initial";
      return regionSvg(r, cls);
    })
    .join("");

  let robot = "";
  if (s.tick) {
    const p = s.tick.x;
    const u = s.tick.u;
    const tip: Vec2 = [p[0] + u[0] * 0.8, p[1] + u[1] * 0.8];
    robot =
      `<line class="robot-u" x1="${fmt(sx(p))}" y1="${fmt(sy(p))}" ` +
      `x2="${fmt(sx(tip))}" y2="${fmt(sy(tip))}"/>` +
      `<circle class="robot" cx="${fmt(sx(p))}" cy="${fmt(sy(p))}" r="0.35"/>`;
  }

  return (
    `<svg class="map" viewBox="${fmt(b.x0)} ${fmt(b.y0)} ${fmt(b.w)} ${fmt(b.h)}" ` +
    `preserveAspectRatio="xMidYMid meet">` +
    edges +
    discovered +
    regions +
    trailSvg(s.trail) +
    robot +
    `</svg>`
  );
}

function sparkline(values: number[], cls: string): string {
  if (values.length === 0) return `<svg class="${cls}"></svg>`;
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const w = 120;
  const h = 28;
  const n = values.length;
  const pts = values
    .map((v, i) => {
      const px = n === 1 ? w / 2 : (i / (n - 1)) * w;
      const py = h - 3 - ((v - lo) / span) * (h - 6);
      return `${fmt(px, 1)},${fmt(py, 1)}`;
    })
    .join(" ");
  return (
    `<svg class="${cls}" viewBox="0 0 ${w} ${h}">` +
    `<polyline points="${pts}"/></svg>`
  );
}

function gauges(s: CockpitState): string {
  const sc = s.scenario;
  const t = s.tick;
  const kappa = t ? t.kappa : 1;
  const kappaBar = Math.round(kappa * 100);

  let distCell: string;
  if (!sc || !t || t.d_t === null) {
    distCell = `<div class="gauge-note">no reachable trap</div>`;
  } else {
    const top = (sc.d_s + sc.eps_buffer) * 2;
    const pos = Math.min(100, (t.d_t / top) * 100);
    const mark1 = (sc.d_s / top) * 100;
    const mark2 = ((sc.d_s + sc.eps_buffer) / top) * 100;
    distCell =
      `<div class="band-gauge">` +
      `<div class="band-zone stop" style="width:${fmt(mark1, 1)}%"></div>` +
      `<div class="band-zone blend" style="left:${fmt(mark1, 1)}%;width:${fmt(mark2 - mark1, 1)}%"></div>` +
      `<div class="band-needle" style="left:${fmt(pos, 1)}%"></div>` +
      `</div>` +
      `<div class="gauge-value">d_t ${fmt(t.d_t)} (d_s ${fmt(sc.d_s)})</div>`;
  }

  const lastUpdate = s.betaTrace[s.betaTrace.length - 1];
  const series = lastUpdate ? lastUpdate.history : s.beta !== null ? [s.beta] : [];
  return (
    `<div class="gauges">` +
    `<div class="gauge"><div class="gauge-title">authority κ</div>` +
    `<div class="kappa-gauge"><div class="kappa-fill" style="width:${kappaBar}%"></div></div>` +
    `<div class="gauge-value">${fmt(kappa)}</div></div>` +
    `<div class="gauge"><div class="gauge-title">trap distance</div>${distCell}</div>` +
    `<div class="gauge"><div class="gauge-title">preference β</div>` +
    sparkline(series, "spark") +
    `<div class="gauge-value">${fmt(s.beta, 3)}` +
    (lastUpdate ? ` <span class="muted">(${lastUpdate.iterations} iters)</span>` : "") +
    `</div></div>` +
    `</div>`
  );
}

function planStrip(s: CockpitState): string {
  if (!s.plan) {
    return `<div class="plan-strip"><span class="muted">no plan (${esc(
      s.tick?.mode ?? "start",
    )})</span></div>`;
  }
  const pre = s.plan.prefix;
  const suf = s.plan.suffix;
  const cur =
    s.cursor < pre.length
      ? s.cursor
      : pre.length + ((s.cursor - pre.length) % Math.max(1, suf.length));
  const chip = (rid: string, idx: number, extra: string) => {
    let cls = "chip" + extra;
    if (idx < cur) cls += " done";
    if (idx === cur) cls += " current";
    return `<span class="${cls}">${esc(rid)}</span>`;
  };
  const preHtml = pre.map((r, i) => chip(r, i, "")).join("");
  const sufHtml = suf.map((r, i) => chip(r, pre.length + i, " loop")).join("");
  const reason = s.planReason
    ? `<span class="muted">(${esc(s.planReason)}` +
      (s.planCost !== null ? `, cost ${fmt(s.planCost, 1)}` : "") +
      `)</span>`
    : "";
  return (
    `<div class="plan-strip">${preHtml}` +
    `<span class="loop-mark">⟲</span>${sufHtml} ${reason}</div>`
  );
}

function taskPanel(s: CockpitState): string {
  const ids = [...s.tasks.keys()].sort((a, b) => a - b);
  if (ids.length === 0) {
    return `<div class="task-panel muted">no temporary tasks</div>`;
  }
  const rows = ids
    .map((id) => {
      const t = s.tasks.get(id)!;
      const delay =
        t.predicted_delay === null
          ? "—"
          : t.predicted_delay <= 0
            ? `on time (${fmt(-t.predicted_delay, 1)}s margin)`
            : `late by ${fmt(t.predicted_delay, 1)}s`;
      const err = t.error ? ` <span class="err">${esc(t.error)}</span>` : "";
      return (
        `<tr class="task-${esc(t.status)}"><td>#${t.task_id}</td>` +
        `<td>${esc(t.pickup)} → ${esc(t.dropoff)}</td>` +
        `<td>${fmt(t.deadline_s, 0)}s</td>` +
        `<td>${esc(t.status)}${err}</td><td>${delay}</td></tr>`
      );
    })
    .join("");
  return (
    `<div class="task-panel"><table>` +
    `<thead><tr><th>id</th><th>route</th><th>deadline</th>` +
    `<th>status</th><th>delay</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`
  );
}

function statusLine(s: CockpitState): string {
  const t = s.tick;
  const conn = s.connected
    ? `<span class="ok">connected</span>`
    : `<span class="err">disconnected</span>`;
  if (!t) return `<div class="status-line">${conn}</div>`;
  return (
    `<div class="status-line">${conn}` +
    ` <span>t=${t.t}</span> <span>${fmt(t.sim_time, 1)}s</span>` +
    ` <span>mode ${esc(t.mode)}</span>` +
    ` <span>region ${esc(t.region ?? "free")}</span>` +
    ` <span>u_h [${fmt(t.u_h[0])}, ${fmt(t.u_h[1])}]</span>` +
    (t.paused ? ` <span class="warn">paused</span>` : "") +
    `</div>`
  );
}

function bannerList(s: CockpitState): string {
  if (s.banners.length === 0) return "";
  const items = s.banners
    .map((b) => `<li class="banner ${b.level}">${esc(b.text)}</li>`)
    .join("");
  return `<ul class="banner-list">${items}</ul>`;
}

/** Render the full cockpit view for a state. */
export function render(s: CockpitState): string {
  const title = s.scenario
    ? `<div class="scenario-title">${esc(s.scenario.name)}` +
      ` <span class="muted">${esc(s.scenario.phi_hard)}</span>` +
      (s.scenario.phi_soft
        ? ` <span class="muted soft">soft: ${esc(s.scenario.phi_soft)}</span>`
        : "") +
      `</div>`
    : `<div class="scenario-title muted">waiting for hello…</div>`;
  return (
    `<div class="cockpit">` +
    title +
    bannerList(s) +
    statusLine(s) +
    mapSvg(s) +
    gauges(s) +
    planStrip(s) +
    taskPanel(s) +
    `</div>`
  );
}
