/**
 * Controller wiring the store, the API client, and the DOM together.
 *
 * Mutations (posted findings) are optimistic with rollback on failure and
 * serialized through a client-side queue: one in-flight mutation at a time
 * per session. What-if previews, explanations, and extraction are reads and
 * may overlap.
 */

import { ApiClient, ApiError } from './api.js';
import { MutationQueue } from './queue.js';
import { Store, statusOf, withFinding } from './state.js';
import type { Proposal, Status } from './types.js';
import { buildSkeleton, render, type Handlers } from './view.js';

export class ExplorerApp {
  readonly store = new Store();
  readonly queue = new MutationQueue();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async start(): Promise<void> {
    const handlers: Handlers = {
      onToggle: (feature, status) => this.toggleFinding(feature, status),
      onSearch: (text) => this.store.update({ search: text }),
      onPreview: (feature, status) => this.previewWhatIf(feature, status),
      onCommitWhatIf: () => this.commitWhatIf(),
      onDismissWhatIf: () => this.store.update({ whatIf: null }),
      onOpenTrace: (hypothesis) => this.openTrace(hypothesis),
      onCloseTrace: () => this.store.update({ trace: null }),
      onSubmitText: (text) => this.submitText(text),
      onAcceptProposal: (proposal) => this.acceptProposal(proposal),
      onDismissNotice: (id) => this.store.dismissNotice(id),
      onToggleShowAll: () => this.store.update({ showAll: !this.store.state.showAll }),
    };
    buildSkeleton(this.root, handlers);
    this.store.subscribe((state) => render(this.root, state, handlers));

    try {
      const codex = await this.api.getCodex();
      const session = await this.api.createSession();
      const differential = await this.api.getDifferential(session.id);
      this.store.update({ codex, sessionId: session.id, differential });
    } catch (error) {
      this.store.pushNotice(`could not connect: ${describe(error)}`);
    }
  }

  private get sessionId(): string {
    const id = this.store.state.sessionId;
    if (!id) {
      throw new Error('no active session');
    }
    return id;
  }

  toggleFinding(feature: string, status: Status): Promise<void> {
    const before = statusOf(this.store.state.findings, feature);
    this.store.update({
      findings: withFinding(this.store.state.findings, feature, status),
      busy: true,
    });
    return this.queue
      .run(() => this.api.postFinding(this.sessionId, feature, status))
      .then((differential) => {
        // a committed change invalidates any pending preview
        this.store.update({ differential, whatIf: null });
        return this.refreshTrace();
      })
      .catch((error) => {
        this.store.update({
          findings: withFinding(this.store.state.findings, feature, before),
        });
        this.store.pushNotice(`could not set ${feature} = ${status}: ${describe(error)}`);
      })
      .finally(() => {
        this.store.update({ busy: this.queue.pending > 0 });
      });
  }

  previewWhatIf(feature: string, status: Status): Promise<void> {
    return this.api
      .whatIf(this.sessionId, feature, status)
      .then((differential) => {
        this.store.update({ whatIf: { feature, status, differential } });
      })
      .catch((error) => {
        this.store.pushNotice(`what-if failed for ${feature}: ${describe(error)}`);
      });
  }

  commitWhatIf(): Promise<void> {
    const preview = this.store.state.whatIf;
    if (!preview) {
      return Promise.resolve();
    }
    return this.toggleFinding(preview.feature, preview.status);
  }

  openTrace(hypothesis: string): Promise<void> {
    return this.api
      .getExplanation(this.sessionId, hypothesis)
      .then((explanation) => this.store.update({ trace: explanation }))
      .catch((error) => {
        this.store.pushNotice(`no trace for ${hypothesis}: ${describe(error)}`);
      });
  }

  private refreshTrace(): Promise<void> {
    const open = this.store.state.trace;
    if (!open) {
      return Promise.resolve();
    }
    return this.openTrace(open.hypothesis);
  }

  submitText(text: string): Promise<void> {
    if (!text.trim()) {
      return Promise.resolve();
    }
    return this.api
      .extract(this.sessionId, text)
      .then(({ proposals }) => this.store.update({ proposals }))
      .catch((error) => {
        this.store.pushNotice(`extraction failed: ${describe(error)}`);
      });
  }

  acceptProposal(proposal: Proposal): Promise<void> {
    if (!proposal.match.matched || !proposal.match.feature || !proposal.suggested_status) {
      return Promise.resolve();
    }
    this.store.update({
      proposals: this.store.state.proposals.filter((p) => p !== proposal),
    });
    return this.toggleFinding(proposal.match.feature, proposal.suggested_status);
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`;
  }
  return String(error);
}
