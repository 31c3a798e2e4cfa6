// Typed client for the dialoplan gateway. All dialogue logic lives server
// side; this wrapper only shuttles JSON and normalizes errors.

export interface AgentEvent {
  kind: 'agent' | 'service' | 'branch' | 'note';
  text?: string;
  data?: Record<string, unknown>;
}

export interface SessionSnapshot {
  id: string;
  fixture: string | null;
  status: string;
  current_node: number;
  branch_taken: string | null;
  events?: AgentEvent[];
}

export interface PlanNode {
  id: number;
  action: string;
  kind: 'dialogue' | 'service' | 'system';
}

export interface PlanEdge {
  from: number;
  to: number;
  outcome: { adds: string[]; dels: string[] };
  formula: string;
}

export interface PlanDoc {
  version: string;
  nodes: PlanNode[];
  edges: PlanEdge[];
  initial: number;
  goals: number[];
  cursor?: number;
}

export interface FixtureInfo {
  name: string;
  title: string;
  top_intent: string | null;
  executable: boolean;
}

export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new GatewayError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class GatewayClient {
  constructor(private base: string = '') {}

  listFixtures(): Promise<{ fixtures: FixtureInfo[] }> {
    return request(`${this.base}/fixtures`);
  }

  createSession(fixture: string, context0?: Record<string, unknown>): Promise<SessionSnapshot> {
    return request(`${this.base}/sessions`, {
      method: 'POST',
      body: JSON.stringify(context0 ? { fixture, context0 } : { fixture }),
    });
  }

  sendMessage(sessionId: string, text: string): Promise<SessionSnapshot> {
    return request(`${this.base}/sessions/${sessionId}/message`, {
      method: 'POST',
      body: JSON.stringify({ text }),
    });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return request(`${this.base}/sessions/${sessionId}`);
  }

  getPlan(sessionId: string): Promise<PlanDoc> {
    return request(`${this.base}/sessions/${sessionId}/plan`);
  }
}
