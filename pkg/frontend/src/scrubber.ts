// Interpolation scrubber: fetch one lambda grid between two presets, then
// scrub through the cached frames with no further network traffic.

import { InterpolateFrame, StudioClient } from "./api.js";
import { clamp01 } from "./state.js";

export const LAMBDA_STEPS = 11; // lam = 0.0, 0.1, ..., 1.0

export interface ScrubberOptions {
  steps?: number;
  text?: string;
  sourceFont?: string;
}

export class InterpolationScrubber {
  private frames: InterpolateFrame[] = [];
  position = 0; // index of the frame currently shown

  constructor(
    private client: Pick<StudioClient, "interpolate">,
    private render: (frame: InterpolateFrame) => void,
  ) {}

  get loaded(): boolean {
    return this.frames.length > 0;
  }

  get lambdas(): number[] {
    return this.frames.map((f) => f.lam);
  }

  /** Fetch the full grid between two attribute maps and show the lam=0 end. */
  async load(
    a: Record<string, number>,
    b: Record<string, number>,
    opts: ScrubberOptions = {},
  ): Promise<void> {
    const res = await this.client.interpolate({
      attributes_a: a,
      attributes_b: b,
      steps: opts.steps ?? LAMBDA_STEPS,
      text: opts.text,
      source_font: opts.sourceFont,
    });
    this.frames = res.frames;
    this.seek(0);
  }

  /** Snap lam to the nearest grid point and render that frame. */
  seek(lam: number): InterpolateFrame {
    if (!this.frames.length) throw new Error("no frames loaded");
    const i = Math.round(clamp01(lam) * (this.frames.length - 1));
    this.position = i;
    const frame = this.frames[i];
    this.render(frame);
    return frame;
  }

  clear(): void {
    this.frames = [];
    this.position = 0;
  }
}
