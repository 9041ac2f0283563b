/**
 * Client-side serialization of session mutations: at most one in-flight
 * mutation at a time, later ones queued in arrival order. A failed task
 * rejects its own caller but never blocks the queue.
 */

export class MutationQueue {
  private tail: Promise<unknown> = Promise.resolve();
  private active = 0;

  get pending(): number {
    return this.active;
  }

  run<T>(task: () => Promise<T>): Promise<T> {
    this.active += 1;
    const next = this.tail
      .catch(() => undefined)
      .then(() => task())
      .finally(() => {
        this.active -= 1;
      });
    this.tail = next.catch(() => undefined);
    return next;
  }

  /** Resolves once everything queued so far has settled. */
  async idle(): Promise<void> {
    while (this.active > 0) {
      await this.tail.catch(() => undefined);
    }
  }
}
