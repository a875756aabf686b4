/** Correction loop: pull the next pending item, edit, submit, advance.

Submission outcomes are values, not exceptions: the workbench needs to
render each one differently (advance, show the conflict, show the
service's violation list) and none of them are programming errors.
Transport failures still throw, since no rendering can fix those.
*/

import { ApiClient, ApiError } from "./api.js";
import { ReviewItem, Verdict } from "./types.js";
import { ReviewViewModel } from "./viewmodel.js";

export type SubmitResult =
  | { ok: true; item: ReviewItem }
  | { ok: false; kind: "blocked"; violations: string[] }
  | { ok: false; kind: "conflict"; message: string }
  | { ok: false; kind: "invalid"; message: string; violations: string[] };

export class ReviewSession {
  current: ReviewViewModel | null = null;

  constructor(private readonly client: ApiClient) {}

  /** Load the earliest pending item into the editor; null when queue is empty. */
  async loadNext(): Promise<ReviewViewModel | null> {
    const page = await this.client.listQueue("pending", 1);
    const item = page.items[0];
    this.current = item === undefined ? null : new ReviewViewModel(item);
    return this.current;
  }

  /** Re-fetch the loaded item, discarding local edits and conflict state. */
  async refresh(): Promise<ReviewViewModel | null> {
    if (this.current === null) return null;
    const item = await this.client.getItem(this.current.itemId);
    this.current = new ReviewViewModel(item);
    return this.current;
  }

  /**
   * Submit the current state with a verdict.
   *
   * Invalid local state is refused without any request. A 409 marks the
   * editor conflicted (someone else resolved the item first); a 422
   * records the service's violations. Success clears the editor so the
   * next `loadNext` advances the queue.
   */
  async submit(verdict: Verdict): Promise<SubmitResult> {
    const vm = this.current;
    if (vm === null) {
      throw new Error("no review item is loaded");
    }
    if (vm.conflict !== null) {
      return { ok: false, kind: "conflict", message: vm.conflict };
    }
    const violations = vm.violations();
    if (violations.length > 0) {
      return { ok: false, kind: "blocked", violations };
    }
    try {
      const item = await this.client.submitCorrection(vm.itemId, vm.toCorrection(verdict));
      this.current = null;
      return { ok: true, item };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        vm.markConflict(err.message);
        return { ok: false, kind: "conflict", message: err.message };
      }
      if (err instanceof ApiError && err.status === 422) {
        vm.noteRejection(err.violations);
        return { ok: false, kind: "invalid", message: err.message, violations: [...err.violations] };
      }
      throw err;
    }
  }
}
