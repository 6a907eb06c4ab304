// Debounced live preview with latest-wins bookkeeping.
//
// Slider drags commit state here; a trailing-edge debounce collapses each
// burst into at most one /api/generate call, and monotonically increasing
// request ids ensure a stale response (superseded while in flight) is
// dropped instead of overwriting a newer grid.

import { ApiError, GenerateRequest, GenerateResponse, StudioClient } from "./api.js";

export const DEBOUNCE_MS = 250;

export class DebouncedPreview {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: GenerateRequest | null = null;
  private lastSentKey: string | null = null;
  private requestId = 0;

  constructor(
    private client: Pick<StudioClient, "generate">,
    private render: (res: GenerateResponse, req: GenerateRequest) => void,
    private onError: (err: ApiError, req: GenerateRequest) => void = () => {},
    private delayMs: number = DEBOUNCE_MS,
  ) {}

  /** Schedule a preview for this state; restarts the debounce window. */
  commit(req: GenerateRequest): void {
    this.pending = req;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => void this.dispatch(), this.delayMs);
  }

  /** Fire the pending request immediately (slider release). */
  flush(): void {
    if (this.timer === null) return;
    clearTimeout(this.timer);
    void this.dispatch();
  }

  dispose(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.pending = null;
  }

  private async dispatch(): Promise<void> {
    this.timer = null;
    const req = this.pending;
    this.pending = null;
    if (req === null) return;

    const key = JSON.stringify(req);
    if (key === this.lastSentKey) return; // state unchanged since last send
    this.lastSentKey = key;

    const id = ++this.requestId;
    try {
      const res = await this.client.generate(req);
      if (id !== this.requestId) return; // superseded while in flight
      this.render(res, req);
    } catch (err) {
      if (id !== this.requestId) return;
      this.lastSentKey = null; // allow an identical retry after a failure
      this.onError(err as ApiError, req);
    }
  }
}
