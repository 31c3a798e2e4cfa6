// @vitest-environment happy-dom
import { describe, expect, it } from 'vitest';

import type { PlanDoc } from '../src/api.js';
import { renderPlan } from '../src/render.js';

const luggagePlan: PlanDoc = {
  version: 'dialoplan-plan/1',
  nodes: [
    { id: 0, action: 'ask-checkin-luggage', kind: 'dialogue' },
    { id: 1, action: 'Done', kind: 'system' },
    { id: 2, action: 'set-luggage-checkin', kind: 'service' },
    { id: 3, action: 'ask-how-many', kind: 'dialogue' },
    { id: 4, action: 'Done', kind: 'system' },
  ],
  edges: [
    { from: 0, to: 1, outcome: { adds: ['no-checkin'], dels: [] }, formula: 'no-checkin' },
    { from: 0, to: 2, outcome: { adds: ['ok-checkin', 'have-number'], dels: [] }, formula: '' },
    { from: 0, to: 3, outcome: { adds: ['ok-checkin'], dels: [] }, formula: 'ok-checkin' },
    { from: 0, to: 0, outcome: { adds: [], dels: [] }, formula: '(and)' },
    { from: 3, to: 2, outcome: { adds: ['have-number'], dels: [] }, formula: 'have-number' },
    { from: 3, to: 3, outcome: { adds: [], dels: [] }, formula: '(and)' },
    { from: 2, to: 4, outcome: { adds: ['luggage-checkin-set'], dels: [] }, formula: '' },
  ],
  initial: 0,
  goals: [1, 4],
};

describe('plan rendering', () => {
  it('draws two double-ring goal nodes and highlights the cursor', () => {
    const host = document.createElement('div');
    renderPlan(host, luggagePlan, 0, []);
    expect(host.querySelectorAll('.goal-outline').length).toBe(2);
    const cursor = host.querySelectorAll('.node.cursor');
    expect(cursor.length).toBeGreaterThan(0);
    expect(host.querySelector('[data-node="0"] .cursor, [data-node="0"].node-group')).toBeTruthy();
  });

  it('labels branching edges with their formulas, empty as [ ]', () => {
    const host = document.createElement('div');
    renderPlan(host, luggagePlan, 0, []);
    const labels = [...host.querySelectorAll('.edge-label')].map((n) => n.textContent);
    expect(labels).toContain('[have-number]');
    expect(labels).toContain('[ ]');
  });

  it('flashes exactly the traversed edge', () => {
    const host = document.createElement('div');
    renderPlan(host, luggagePlan, 3, [{ from: 3, to: 2, label: '[have-number]' }]);
    const flashed = [...host.querySelectorAll('.edge.flash')];
    expect(flashed.length).toBe(1);
    expect(flashed[0].getAttribute('data-edge')).toBe('3-2');
  });

  it('uses one glyph per action kind', () => {
    const host = document.createElement('div');
    renderPlan(host, luggagePlan, 0, []);
    expect(host.querySelectorAll('rect.kind-dialogue').length).toBeGreaterThan(0);
    expect(host.querySelectorAll('ellipse.kind-service').length).toBe(1);
  });

  it('is deterministic for the same inputs', () => {
    const a = document.createElement('div');
    const b = document.createElement('div');
    renderPlan(a, luggagePlan, 0, []);
    renderPlan(b, luggagePlan, 0, []);
    expect(a.innerHTML).toBe(b.innerHTML);
  });
});
