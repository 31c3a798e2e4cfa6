// SVG rendering of the plan graph: node glyph per action kind (box for
// dialogue, ellipse for service, diamond for system), double border on
// goal nodes, formula labels on branching edges, highlight classes for the
// cursor node and the edges taken last turn.

import type { PlanDoc, PlanEdge } from './api.js';
import { layoutPlan } from './layout.js';
import type { EdgeRef } from './model.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

function el(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function edgeLabel(e: PlanEdge): string {
  const lits = [...e.outcome.adds, ...e.outcome.dels.map((d) => '!' + d)];
  return lits.length ? `[${lits.join(', ')}]` : '[ ]';
}

function isFlashed(e: PlanEdge, flashed: EdgeRef[]): boolean {
  return flashed.some((f) => f.from === e.from && f.to === e.to);
}

export function renderPlan(
  container: HTMLElement,
  plan: PlanDoc,
  cursor: number,
  flashed: EdgeRef[],
): void {
  const layout = layoutPlan(plan);
  container.textContent = '';
  const svg = el('svg', {
    width: layout.width,
    height: layout.height,
    viewBox: `0 0 ${layout.width} ${layout.height}`,
  });
  svg.setAttribute('class', 'plan-graph');

  const defs = el('defs', {});
  const marker = el('marker', {
    id: 'arrow',
    viewBox: '0 0 10 10',
    refX: 9,
    refY: 5,
    markerWidth: 7,
    markerHeight: 7,
    orient: 'auto-start-reverse',
  });
  marker.appendChild(el('path', { d: 'M 0 0 L 10 5 L 0 10 z', fill: '#555' }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  const outDegree = new Map<number, number>();
  for (const e of plan.edges) {
    outDegree.set(e.from, (outDegree.get(e.from) ?? 0) + 1);
  }

  for (const e of plan.edges) {
    const a = layout.positions.get(e.from)!;
    const b = layout.positions.get(e.to)!;
    const flash = isFlashed(e, flashed);
    const cls = flash ? 'edge flash' : 'edge';
    let path: SVGElement;
    let labelX: number;
    let labelY: number;
    if (e.from === e.to) {
      const r = 24;
      path = el('path', {
        d:
          `M ${a.x + layout.nodeWidth / 2 - 8} ${a.y - 10} ` +
          `a ${r} ${r} 0 1 1 4 20`,
        class: cls,
        fill: 'none',
        'marker-end': 'url(#arrow)',
      });
      labelX = a.x + layout.nodeWidth / 2 + 38;
      labelY = a.y;
    } else {
      path = el('line', {
        x1: a.x,
        y1: a.y + layout.nodeHeight / 2,
        x2: b.x,
        y2: b.y - layout.nodeHeight / 2,
        class: cls,
        'marker-end': 'url(#arrow)',
      });
      labelX = (a.x + b.x) / 2 + 6;
      labelY = (a.y + b.y) / 2;
    }
    path.setAttribute('data-edge', `${e.from}-${e.to}`);
    svg.appendChild(path);
    if ((outDegree.get(e.from) ?? 0) > 1) {
      const label = el('text', { x: labelX, y: labelY, class: 'edge-label' });
      label.textContent = edgeLabel(e);
      svg.appendChild(label);
    }
  }

  for (const n of plan.nodes) {
    const p = layout.positions.get(n.id)!;
    const group = el('g', { class: 'node-group' });
    const isGoal = plan.goals.includes(n.id);
    const isCursor = n.id === cursor;
    const cls = ['node', `kind-${n.kind}`, isGoal ? 'goal' : '', isCursor ? 'cursor' : '']
      .filter(Boolean)
      .join(' ');
    const w = layout.nodeWidth;
    const h = layout.nodeHeight;
    if (isGoal) {
      // double border: an outer rectangle behind the main one
      group.appendChild(
        el('rect', {
          x: p.x - w / 2 - 4,
          y: p.y - h / 2 - 4,
          width: w + 8,
          height: h + 8,
          rx: 6,
          class: `${cls} goal-outline`,
          fill: 'none',
        }),
      );
      group.appendChild(
        el('rect', { x: p.x - w / 2, y: p.y - h / 2, width: w, height: h, rx: 4, class: cls }),
      );
    } else if (n.kind === 'service') {
      group.appendChild(el('ellipse', { cx: p.x, cy: p.y, rx: w / 2, ry: h / 2, class: cls }));
    } else if (n.kind === 'system') {
      const d =
        `M ${p.x} ${p.y - h / 2 - 6} L ${p.x + w / 2} ${p.y} ` +
        `L ${p.x} ${p.y + h / 2 + 6} L ${p.x - w / 2} ${p.y} Z`;
      group.appendChild(el('path', { d, class: cls }));
    } else {
      group.appendChild(
        el('rect', { x: p.x - w / 2, y: p.y - h / 2, width: w, height: h, rx: 4, class: cls }),
      );
    }
    const text = el('text', { x: p.x, y: p.y + 4, class: 'node-label' });
    text.textContent = n.action;
    group.appendChild(text);
    group.setAttribute('data-node', String(n.id));
    svg.appendChild(group);
  }

  container.appendChild(svg);
}

export function renderLegend(container: HTMLElement): void {
  container.innerHTML =
    '<span class="legend-item"><span class="swatch swatch-box"></span>dialogue</span>' +
    '<span class="legend-item"><span class="swatch swatch-ellipse"></span>service</span>' +
    '<span class="legend-item"><span class="swatch swatch-diamond"></span>system</span>' +
    '<span class="legend-item"><span class="swatch swatch-goal"></span>goal</span>';
}
