// Slider panel state: the client-side view of one attribute vector.

export function clamp01(v: number): number {
  if (!Number.isFinite(v)) return 0.5;
  return v < 0 ? 0 : v > 1 ? 1 : v;
}

/** Convex combination per attribute name. Exact at the endpoints:
 *  lam=0 returns a's values bitwise, lam=1 returns b's. */
export function mix(
  a: Record<string, number>,
  b: Record<string, number>,
  lam: number,
): Record<string, number> {
  const out: Record<string, number> = {};
  for (const k of Object.keys(a)) out[k] = (1 - lam) * a[k] + lam * b[k];
  return out;
}

export class SliderPanel {
  readonly names: string[];
  private values: number[];
  /** Set when the state has changed since the last committed preview. */
  dirty = false;
  activePreset: string | null = null;

  constructor(names: string[]) {
    this.names = [...names];
    this.values = names.map(() => 0.5);
  }

  get(name: string): number {
    const i = this.names.indexOf(name);
    if (i < 0) throw new Error(`unknown attribute: ${name}`);
    return this.values[i];
  }

  /** Clamped write; returns whether the value actually changed. */
  set(name: string, v: number): boolean {
    const i = this.names.indexOf(name);
    if (i < 0) throw new Error(`unknown attribute: ${name}`);
    const next = clamp01(v);
    if (next === this.values[i]) return false;
    this.values[i] = next;
    this.dirty = true;
    this.activePreset = null;
    return true;
  }

  /** Current vector keyed by name, in schema order. */
  snapshot(): Record<string, number> {
    const out: Record<string, number> = {};
    this.names.forEach((n, i) => (out[n] = this.values[i]));
    return out;
  }

  /** Overwrite from a preset map; unnamed attributes fall back to 0.5. */
  applyPreset(id: string | null, values: Record<string, number>): void {
    this.values = this.names.map((n) => clamp01(n in values ? values[n] : 0.5));
    this.dirty = true;
    this.activePreset = id;
  }

  randomize(rand: () => number = Math.random): void {
    this.values = this.names.map(() => clamp01(rand()));
    this.dirty = true;
    this.activePreset = null;
  }
}
