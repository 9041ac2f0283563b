/**
 * DOM rendering. The skeleton (with its input controls) is built once;
 * render() replaces only the data-driven lists and panels. All displayed
 * numbers are service values carried through unchanged (display formatting
 * via toFixed only); exact values are mirrored into data-* attributes.
 */

import type { Proposal, Status } from './types.js';
import {
  CHART_LIMIT,
  ghostByHypothesis,
  filterFeatures,
  statusOf,
  visibleEntries,
  type UiState,
} from './state.js';

export interface Handlers {
  onToggle(feature: string, status: Status): void;
  onSearch(text: string): void;
  onPreview(feature: string, status: Status): void;
  onCommitWhatIf(): void;
  onDismissWhatIf(): void;
  onOpenTrace(hypothesis: string): void;
  onCloseTrace(): void;
  onSubmitText(text: string): void;
  onAcceptProposal(proposal: Proposal): void;
  onDismissNotice(id: number): void;
  onToggleShowAll(): void;
}

const STATUSES: Status[] = ['present', 'absent', 'unknown'];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function buildSkeleton(root: HTMLElement, handlers: Handlers): void {
  root.innerHTML = `
    <header class="topbar">
      <h1>abductor explorer</h1>
      <span class="session-label"></span>
    </header>
    <div class="notices"></div>
    <main class="layout">
      <section class="panel findings-panel">
        <h2>Findings</h2>
        <input class="search" type="search" placeholder="filter features…">
        <div class="feature-list"></div>
      </section>
      <section class="panel chart-panel">
        <h2>Differential</h2>
        <div class="whatif-banner"></div>
        <div class="chart"></div>
        <div class="chart-footer"></div>
      </section>
      <section class="panel side-panel">
        <div class="trace-container"></div>
        <div class="intake-panel">
          <h2>Text intake</h2>
          <textarea class="intake-text" rows="3" placeholder="paste free text…"></textarea>
          <button class="intake-submit">Propose findings</button>
          <div class="proposal-list"></div>
        </div>
      </section>
    </main>
  `;
  const search = root.querySelector<HTMLInputElement>('.search')!;
  search.addEventListener('input', () => handlers.onSearch(search.value));
  const submit = root.querySelector<HTMLButtonElement>('.intake-submit')!;
  const textarea = root.querySelector<HTMLTextAreaElement>('.intake-text')!;
  submit.addEventListener('click', () => handlers.onSubmitText(textarea.value));
}

function renderNotices(container: HTMLElement, state: UiState, handlers: Handlers): void {
  container.replaceChildren();
  for (const notice of state.notices) {
    const row = el('div', 'notice');
    row.append(el('span', 'notice-message', notice.message));
    const dismiss = el('button', 'notice-dismiss', 'dismiss');
    dismiss.addEventListener('click', () => handlers.onDismissNotice(notice.id));
    row.append(dismiss);
    container.append(row);
  }
}

function renderFeatureList(container: HTMLElement, state: UiState, handlers: Handlers): void {
  container.replaceChildren();
  if (!state.codex) {
    return;
  }
  for (const feature of filterFeatures(state.codex.features, state.search)) {
    const row = el('div', 'feature-row');
    row.dataset.feature = feature.id;
    const current = statusOf(state.findings, feature.id);
    row.dataset.status = current;

    const label = el('div', 'feature-label');
    label.append(el('span', 'feature-name', feature.name));
    label.append(el('span', 'mono', ` (${feature.id})`));
    if (feature.synonyms.length) {
      label.append(el('span', 'feature-synonyms', feature.synonyms.join(', ')));
    }
    row.append(label);

    const toggles = el('div', 'toggle-group');
    for (const status of STATUSES) {
      const button = el('button', 'toggle', status);
      button.dataset.status = status;
      if (status === current) {
        button.classList.add('active');
      }
      button.addEventListener('click', () => handlers.onToggle(feature.id, status));
      toggles.append(button);
    }
    row.append(toggles);

    const previews = el('div', 'preview-group');
    for (const status of ['present', 'absent'] as Status[]) {
      const button = el('button', 'preview', status === 'present' ? 'if +' : 'if −');
      button.dataset.status = status;
      button.title = `preview ${feature.id} = ${status} without committing`;
      button.addEventListener('click', () => handlers.onPreview(feature.id, status));
      previews.append(button);
    }
    row.append(previews);
    container.append(row);
  }
}

function renderWhatIfBanner(container: HTMLElement, state: UiState, handlers: Handlers): void {
  container.replaceChildren();
  if (!state.whatIf) {
    return;
  }
  const banner = el('div', 'whatif-active');
  banner.append(
    el(
      'span',
      'whatif-label',
      `what-if: ${state.whatIf.feature} = ${state.whatIf.status} (ghost bars)`,
    ),
  );
  const commit = el('button', 'whatif-commit', 'commit');
  commit.addEventListener('click', () => handlers.onCommitWhatIf());
  const dismiss = el('button', 'whatif-dismiss', 'dismiss');
  dismiss.addEventListener('click', () => handlers.onDismissWhatIf());
  banner.append(commit, dismiss);
  container.append(banner);
}

function renderChart(container: HTMLElement, state: UiState, handlers: Handlers): void {
  container.replaceChildren();
  if (!state.differential || !state.codex) {
    return;
  }
  const names = new Map(state.codex.hypotheses.map((h) => [h.id, h.name]));
  const ghosts = ghostByHypothesis(state.whatIf);
  visibleEntries(state.differential, state.showAll).forEach((entry, index) => {
    const row = el('div', 'chart-row');
    row.dataset.hypothesis = entry.hypothesis;
    row.dataset.confidence = String(entry.confidence);
    row.dataset.raw = String(entry.raw_score);

    const label = el('div', 'chart-label');
    label.append(el('span', 'rank', `#${index + 1}`));
    label.append(el('span', 'chart-name', names.get(entry.hypothesis) ?? entry.hypothesis));
    label.append(el('span', 'mono', ` (${entry.hypothesis})`));
    label.addEventListener('click', () => handlers.onOpenTrace(entry.hypothesis));
    row.append(label);

    const bars = el('div', 'bars');
    const bar = el('div', 'bar current');
    bar.style.width = `${(entry.confidence * 100).toFixed(1)}%`;
    bars.append(bar);
    const ghost = ghosts.get(entry.hypothesis);
    if (ghost) {
      const ghostBar = el('div', 'bar ghost');
      ghostBar.style.width = `${(ghost.confidence * 100).toFixed(1)}%`;
      ghostBar.dataset.confidence = String(ghost.confidence);
      bars.append(ghostBar);
    }
    row.append(bars);

    const values = el('div', 'chart-values');
    values.append(el('span', 'confidence', entry.confidence.toFixed(3)));
    values.append(el('span', 'raw', `raw ${entry.raw_score}`));
    row.append(values);
    container.append(row);
  });
}

function renderChartFooter(container: HTMLElement, state: UiState, handlers: Handlers): void {
  container.replaceChildren();
  if (!state.differential || state.differential.entries.length <= CHART_LIMIT) {
    return;
  }
  const total = state.differential.entries.length;
  const button = el(
    'button',
    'chart-show-all',
    state.showAll ? `show top ${CHART_LIMIT}` : `show all ${total}`,
  );
  button.addEventListener('click', () => handlers.onToggleShowAll());
  container.append(button);
}

function renderTrace(container: HTMLElement, state: UiState, handlers: Handlers): void {
  container.replaceChildren();
  if (!state.trace || !state.codex) {
    return;
  }
  const trace = state.trace;
  const featureNames = new Map(state.codex.features.map((f) => [f.id, f.name]));
  const hypothesisName =
    state.codex.hypotheses.find((h) => h.id === trace.hypothesis)?.name ?? trace.hypothesis;

  const panel = el('div', 'trace-panel');
  panel.dataset.hypothesis = trace.hypothesis;
  const header = el('div', 'trace-header');
  header.append(el('h2', 'trace-title', `${hypothesisName} (${trace.hypothesis}) — rank ${trace.rank}`));
  const close = el('button', 'trace-close', 'close');
  close.addEventListener('click', () => handlers.onCloseTrace());
  header.append(close);
  panel.append(header);

  for (const contribution of trace.contributions) {
    const row = el('div', 'trace-row');
    row.dataset.feature = contribution.feature;
    row.dataset.term = contribution.term;
    row.dataset.delta = String(contribution.delta);
    row.append(
      el(
        'span',
        'trace-feature',
        `${featureNames.get(contribution.feature) ?? contribution.feature} (${contribution.feature})`,
      ),
    );
    row.append(el('span', 'trace-term', contribution.term));
    const sign = contribution.delta > 0 ? '+' : '';
    row.append(
      el(
        'span',
        `delta ${contribution.delta > 0 ? 'positive' : 'negative'}`,
        `${sign}${contribution.delta}`,
      ),
    );
    panel.append(row);
  }
  if (!trace.contributions.length) {
    panel.append(el('div', 'trace-empty', 'no findings bear on this hypothesis'));
  }

  const sum = el('div', 'trace-sum');
  sum.append(el('span', undefined, 'raw score '));
  const rawValue = el('span', 'trace-raw', String(trace.raw_score));
  rawValue.dataset.raw = String(trace.raw_score);
  sum.append(rawValue);
  panel.append(sum);
  panel.append(el('pre', 'trace-text', trace.text));
  container.append(panel);
}

function renderProposals(container: HTMLElement, state: UiState, handlers: Handlers): void {
  container.replaceChildren();
  if (!state.codex) {
    return;
  }
  const featureNames = new Map(state.codex.features.map((f) => [f.id, f.name]));
  for (const proposal of state.proposals) {
    const row = el('div', 'proposal');
    row.dataset.surface = proposal.mention.surface;
    row.append(el('span', 'proposal-surface', proposal.mention.surface));
    if (proposal.match.matched && proposal.match.feature) {
      const name = featureNames.get(proposal.match.feature) ?? proposal.match.feature;
      row.append(el('span', 'proposal-target', `→ ${name} (${proposal.match.feature})`));
      const score =
        proposal.match.score === null ? '' : ` · ${proposal.match.score.toFixed(3)}`;
      row.append(
        el('span', 'proposal-meta', `${proposal.match.method ?? ''}${score} · ${proposal.suggested_status}`),
      );
      const accept = el('button', 'accept', 'accept');
      accept.addEventListener('click', () => handlers.onAcceptProposal(proposal));
      row.append(accept);
    } else {
      const score =
        proposal.match.score === null ? 'unmatched' : `unmatched · best ${proposal.match.score.toFixed(3)}`;
      row.append(el('span', 'proposal-meta unmatched', score));
    }
    container.append(row);
  }
}

export function render(root: HTMLElement, state: UiState, handlers: Handlers): void {
  const sessionLabel = root.querySelector<HTMLElement>('.session-label')!;
  sessionLabel.textContent = state.sessionId
    ? `codex ${state.codex?.codex_version ?? '?'} · session ${state.sessionId.slice(0, 8)}…`
    : 'connecting…';
  root.classList.toggle('busy', state.busy);
  renderNotices(root.querySelector('.notices')!, state, handlers);
  renderFeatureList(root.querySelector('.feature-list')!, state, handlers);
  renderWhatIfBanner(root.querySelector('.whatif-banner')!, state, handlers);
  renderChart(root.querySelector('.chart')!, state, handlers);
  renderChartFooter(root.querySelector('.chart-footer')!, state, handlers);
  renderTrace(root.querySelector('.trace-container')!, state, handlers);
  renderProposals(root.querySelector('.proposal-list')!, state, handlers);
}
