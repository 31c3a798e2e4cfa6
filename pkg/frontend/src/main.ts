// Wiring: fixture picker, chat transcript, input box, plan graph.
// One active session per tab; the input is disabled while a message is in
// flight and permanently once the dialogue left the awaiting-user state.

import { GatewayClient, GatewayError } from './api.js';
import {
  ViewModel,
  applyError,
  applySnapshot,
  applyUserTurn,
  inputEnabled,
  startView,
  statusBadge,
} from './model.js';
import { renderLegend, renderPlan } from './render.js';

// same-origin by default; override with ?gateway=http://host:port when the
// console is served by a separate static server
const gatewayBase = new URLSearchParams(window.location.search).get('gateway') ?? '';
const client = new GatewayClient(gatewayBase);

let view: ViewModel | null = null;

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function redraw(): void {
  if (!view) return;
  const transcript = byId<HTMLDivElement>('transcript');
  transcript.textContent = '';
  for (const turn of view.transcript) {
    const row = document.createElement('div');
    row.className = `turn turn-${turn.who}`;
    row.textContent = turn.text;
    transcript.appendChild(row);
  }
  transcript.scrollTop = transcript.scrollHeight;

  byId<HTMLSpanElement>('status').textContent = statusBadge(view);
  byId<HTMLSpanElement>('status').className = `badge badge-${view.status}`;
  const branch = byId<HTMLSpanElement>('branch');
  branch.textContent = view.lastBranch ? `last branch ${view.lastBranch}` : '';

  const input = byId<HTMLInputElement>('utterance');
  const send = byId<HTMLButtonElement>('send');
  input.disabled = !inputEnabled(view);
  send.disabled = !inputEnabled(view);
  if (inputEnabled(view)) input.focus();

  const banner = byId<HTMLDivElement>('error-banner');
  if (view.error) {
    banner.textContent = view.error;
    banner.style.display = 'block';
  } else {
    banner.style.display = 'none';
  }

  renderPlan(byId<HTMLDivElement>('graph'), view.plan, view.cursor, view.flashEdges);
}

async function syncCursorWithServer(): Promise<void> {
  // sanity poll: the rendered cursor must always match the gateway's view
  if (!view) return;
  try {
    const snap = await client.getSession(view.sessionId);
    if (snap.current_node !== view.cursor) {
      view = { ...view, cursor: snap.current_node, status: snap.status };
      redraw();
    }
  } catch {
    // transient; the next send will surface real errors
  }
}

async function startChat(fixture: string): Promise<void> {
  const banner = byId<HTMLDivElement>('error-banner');
  try {
    const snapshot = await client.createSession(fixture);
    const plan = await client.getPlan(snapshot.id);
    view = startView(plan, snapshot);
    redraw();
  } catch (err) {
    banner.textContent =
      err instanceof GatewayError
        ? `could not start (${err.status}): ${err.message}`
        : `gateway unreachable: ${err}`;
    banner.style.display = 'block';
    const retry = document.createElement('button');
    retry.textContent = 'retry';
    retry.onclick = () => startChat(fixture);
    banner.appendChild(retry);
  }
}

async function send(): Promise<void> {
  if (!view || !inputEnabled(view)) return;
  const input = byId<HTMLInputElement>('utterance');
  const text = input.value.trim();
  if (!text) return;
  input.value = '';
  view = applyUserTurn(view, text);
  redraw();
  try {
    const snapshot = await client.sendMessage(view.sessionId, text);
    view = applySnapshot(view, snapshot);
  } catch (err) {
    const message =
      err instanceof GatewayError ? `(${err.status}) ${err.message}` : String(err);
    view = applyError(view, message);
  }
  redraw();
  await syncCursorWithServer();
}

async function boot(): Promise<void> {
  renderLegend(byId<HTMLDivElement>('legend'));
  const select = byId<HTMLSelectElement>('fixture-select');
  try {
    const { fixtures } = await client.listFixtures();
    for (const f of fixtures.filter((f) => f.executable)) {
      const opt = document.createElement('option');
      opt.value = f.name;
      opt.textContent = `${f.name}: ${f.title}`;
      select.appendChild(opt);
    }
  } catch (err) {
    const banner = byId<HTMLDivElement>('error-banner');
    banner.textContent = `gateway unreachable: ${err}`;
    banner.style.display = 'block';
    return;
  }
  byId<HTMLButtonElement>('start').onclick = () => startChat(select.value);
  byId<HTMLButtonElement>('send').onclick = () => send();
  byId<HTMLInputElement>('utterance').addEventListener('keydown', (e) => {
    if (e.key === 'Enter') send();
  });
}

boot();
