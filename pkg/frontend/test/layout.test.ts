import { describe, expect, it } from 'vitest';

import type { PlanDoc } from '../src/api.js';
import { layoutPlan } from '../src/layout.js';

const plan: PlanDoc = {
  version: 'dialoplan-plan/1',
  nodes: [
    { id: 0, action: 'ask', kind: 'dialogue' },
    { id: 1, action: 'Done', kind: 'system' },
    { id: 2, action: 'call', kind: 'service' },
    { id: 3, action: 'followup', kind: 'dialogue' },
  ],
  edges: [
    { from: 0, to: 1, outcome: { adds: ['a'], dels: [] }, formula: 'a' },
    { from: 0, to: 3, outcome: { adds: ['b'], dels: [] }, formula: 'b' },
    { from: 0, to: 0, outcome: { adds: [], dels: [] }, formula: '(and)' },
    { from: 3, to: 2, outcome: { adds: ['c'], dels: [] }, formula: 'c' },
    { from: 2, to: 1, outcome: { adds: ['g'], dels: [] }, formula: 'g' },
  ],
  initial: 0,
  goals: [1],
};

describe('layout', () => {
  it('positions every node', () => {
    const layout = layoutPlan(plan);
    for (const n of plan.nodes) {
      expect(layout.positions.has(n.id)).toBe(true);
    }
    expect(layout.width).toBeGreaterThan(0);
    expect(layout.height).toBeGreaterThan(0);
  });

  it('is deterministic for the same document', () => {
    const a = layoutPlan(plan);
    const b = layoutPlan(plan);
    expect([...a.positions.entries()]).toEqual([...b.positions.entries()]);
  });

  it('the initial node sits in the top layer', () => {
    const layout = layoutPlan(plan);
    const rootY = layout.positions.get(plan.initial)!.y;
    for (const n of plan.nodes) {
      expect(layout.positions.get(n.id)!.y).toBeGreaterThanOrEqual(rootY);
    }
  });

  it('non-loop edges never point upward', () => {
    const layout = layoutPlan(plan);
    // BFS layering: a first-discovered child is always strictly below the
    // discovering parent; back edges may exist but the tree edges dominate
    const depthOf = (id: number) => layout.positions.get(id)!.y;
    expect(depthOf(3)).toBeGreaterThan(depthOf(0));
    expect(depthOf(2)).toBeGreaterThan(depthOf(3));
  });
});
