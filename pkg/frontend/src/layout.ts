// Deterministic layered layout for plan graphs. Nodes go into layers by
// BFS depth from the initial node (document order breaks ties), layers are
// stacked top to bottom. No randomness: the same plan JSON always yields
// the same picture.

import type { PlanDoc } from './api.js';

export interface Point {
  x: number;
  y: number;
}

export interface Layout {
  positions: Map<number, Point>;
  width: number;
  height: number;
  nodeWidth: number;
  nodeHeight: number;
}

const H_GAP = 180;
const V_GAP = 110;
const NODE_W = 150;
const NODE_H = 46;
const MARGIN = 40;

export function layoutPlan(plan: PlanDoc): Layout {
  const depth = new Map<number, number>();
  depth.set(plan.initial, 0);
  const queue: number[] = [plan.initial];
  while (queue.length) {
    const cur = queue.shift()!;
    for (const e of plan.edges) {
      if (e.from !== cur || e.to === e.from) continue;
      if (!depth.has(e.to)) {
        depth.set(e.to, depth.get(cur)! + 1);
        queue.push(e.to);
      }
    }
  }
  // disconnected nodes (not expected, but never drop them) go below
  let maxDepth = 0;
  for (const d of depth.values()) maxDepth = Math.max(maxDepth, d);
  for (const n of plan.nodes) {
    if (!depth.has(n.id)) depth.set(n.id, maxDepth + 1);
  }

  const layers = new Map<number, number[]>();
  for (const n of plan.nodes) {
    const d = depth.get(n.id)!;
    if (!layers.has(d)) layers.set(d, []);
    layers.get(d)!.push(n.id);
  }

  const positions = new Map<number, Point>();
  let width = 0;
  const sortedDepths = [...layers.keys()].sort((a, b) => a - b);
  for (const d of sortedDepths) {
    const row = layers.get(d)!;
    row.forEach((id, i) => {
      positions.set(id, {
        x: MARGIN + i * H_GAP + NODE_W / 2,
        y: MARGIN + d * V_GAP + NODE_H / 2,
      });
    });
    width = Math.max(width, MARGIN * 2 + (row.length - 1) * H_GAP + NODE_W);
  }
  const height = MARGIN * 2 + sortedDepths.length * V_GAP;
  return { positions, width, height, nodeWidth: NODE_W, nodeHeight: NODE_H };
}
