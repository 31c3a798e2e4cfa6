// View model for the chat console. State is derived purely from gateway
// responses: the cursor is always the server-reported current node and the
// client never second-guesses branch choices.

import type { AgentEvent, PlanDoc, SessionSnapshot } from './api.js';

export interface ChatTurn {
  who: 'user' | 'agent' | 'system';
  text: string;
}

export interface EdgeRef {
  from: number;
  to: number;
  label: string;
}

export interface ViewModel {
  sessionId: string;
  fixture: string | null;
  status: string;
  plan: PlanDoc;
  cursor: number;
  transcript: ChatTurn[];
  lastBranch: string | null;
  flashEdges: EdgeRef[]; // edges traversed by the latest update, in order
  busy: boolean;
  error: string | null;
}

function turnsFromEvents(events: AgentEvent[]): ChatTurn[] {
  const turns: ChatTurn[] = [];
  for (const e of events) {
    if (e.kind === 'agent' && e.text) turns.push({ who: 'agent', text: e.text });
    if (e.kind === 'note' && e.text) turns.push({ who: 'system', text: e.text });
    if (e.kind === 'service' && e.data) {
      turns.push({ who: 'system', text: `service: ${JSON.stringify(e.data)}` });
    }
  }
  return turns;
}

function branchesFromEvents(events: AgentEvent[]): EdgeRef[] {
  const out: EdgeRef[] = [];
  for (const e of events) {
    if (e.kind === 'branch' && e.data) {
      out.push({
        from: e.data['from'] as number,
        to: e.data['to'] as number,
        label: e.text ?? '',
      });
    }
  }
  return out;
}

export function startView(plan: PlanDoc, snapshot: SessionSnapshot): ViewModel {
  return {
    sessionId: snapshot.id,
    fixture: snapshot.fixture,
    status: snapshot.status,
    plan,
    cursor: snapshot.current_node,
    transcript: turnsFromEvents(snapshot.events ?? []),
    lastBranch: snapshot.branch_taken,
    flashEdges: branchesFromEvents(snapshot.events ?? []),
    busy: false,
    error: null,
  };
}

export function applyUserTurn(view: ViewModel, text: string): ViewModel {
  return {
    ...view,
    transcript: [...view.transcript, { who: 'user', text }],
    busy: true,
    error: null,
  };
}

export function applySnapshot(view: ViewModel, snapshot: SessionSnapshot): ViewModel {
  return {
    ...view,
    status: snapshot.status,
    cursor: snapshot.current_node,
    lastBranch: snapshot.branch_taken,
    transcript: [...view.transcript, ...turnsFromEvents(snapshot.events ?? [])],
    flashEdges: branchesFromEvents(snapshot.events ?? []),
    busy: false,
    error: null,
  };
}

export function applyError(view: ViewModel, message: string): ViewModel {
  return { ...view, busy: false, error: message };
}

export function inputEnabled(view: ViewModel): boolean {
  return view.status === 'awaiting-user' && !view.busy;
}

export function statusBadge(view: ViewModel): string {
  switch (view.status) {
    case 'awaiting-user':
      return 'your turn';
    case 'done':
      return 'goal reached';
    case 'aborted':
      return 'aborted';
    case 'error':
      return 'error';
    default:
      return view.status;
  }
}
