// Typed client for the font service HTTP API. All model access goes through
// these five endpoints; the studio never touches checkpoints directly.

export interface Health {
  status: string;
  model_loaded: boolean;
}

export interface AttributeSchema {
  names: string[];
  count: number;
}

export interface GlyphImage {
  char: string;
  image: string; // PNG, base64
}

export interface GenerateRequest {
  attributes: Record<string, number>;
  text?: string; // default: the whole charset
  source_font?: string; // default: nearest labeled font
}

export interface GenerateResponse {
  source_font: string;
  glyphs: GlyphImage[];
}

export interface InterpolateRequest {
  attributes_a: Record<string, number>;
  attributes_b: Record<string, number>;
  steps?: number; // 2..41, default 11
  text?: string;
  source_font?: string;
}

export interface InterpolateFrame {
  lam: number;
  source_font: string;
  glyphs: GlyphImage[];
}

export interface InterpolateResponse {
  frames: InterpolateFrame[];
}

export class ApiError extends Error {
  constructor(
    public status: number, // 0 when the service was never reached
    public offending: string[],
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

// Minimal slice of fetch so tests can swap in a fake transport.
export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}
export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<ResponseLike>;

/** Offenders a request would be rejected for: unknown names, missing names,
 *  values outside [0,1]. Mirrors the server checks so a bad request never
 *  leaves the client. */
export function offendingAttributes(
  names: string[],
  attrs: Record<string, number>,
): string[] {
  const known = new Set(names);
  const unknown = Object.keys(attrs).filter((k) => !known.has(k)).sort();
  if (unknown.length) return unknown;
  const missing = names.filter((n) => !(n in attrs));
  if (missing.length) return missing;
  return Object.keys(attrs)
    .filter((k) => {
      const v = attrs[k];
      return !Number.isFinite(v) || v < 0 || v > 1;
    })
    .sort();
}

export class StudioClient {
  /** Attribute names, cached after attributes() or injected for tests.
   *  While unset, requests go out unvetted (the server still checks). */
  schema: string[] | null = null;

  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
    schema: string[] | null = null,
  ) {
    this.schema = schema;
  }

  async health(): Promise<Health> {
    return (await this.request("GET", "/api/health")) as Health;
  }

  async attributes(): Promise<AttributeSchema> {
    const schema = (await this.request("GET", "/api/attributes")) as AttributeSchema;
    this.schema = schema.names;
    return schema;
  }

  async fonts(): Promise<string[]> {
    const body = (await this.request("GET", "/api/fonts")) as { fonts: string[] };
    return body.fonts;
  }

  async generate(req: GenerateRequest): Promise<GenerateResponse> {
    this.vet(req.attributes);
    return (await this.request("POST", "/api/generate", req)) as GenerateResponse;
  }

  async interpolate(req: InterpolateRequest): Promise<InterpolateResponse> {
    this.vet(req.attributes_a);
    this.vet(req.attributes_b);
    const steps = req.steps ?? 11;
    if (!Number.isInteger(steps) || steps < 2 || steps > 41) {
      throw new ApiError(400, [], `steps must be an integer in [2, 41], got ${steps}`);
    }
    return (await this.request("POST", "/api/interpolate", req)) as InterpolateResponse;
  }

  private vet(attrs: Record<string, number>): void {
    if (this.schema === null) return;
    const offending = offendingAttributes(this.schema, attrs);
    if (offending.length) {
      throw new ApiError(400, offending, "rejected before send: invalid attributes");
    }
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    let res: ResponseLike;
    try {
      res = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, [], `service unreachable: ${String(err)}`);
    }
    if (!res.ok) {
      let message = `HTTP ${res.status}`;
      let offending: string[] = [];
      try {
        const detail = ((await res.json()) as { detail?: { message?: string; offending?: string[] } }).detail;
        if (detail?.message) message = detail.message;
        if (detail?.offending) offending = detail.offending;
      } catch {
        // non-JSON error body, keep the generic message
      }
      throw new ApiError(res.status, offending, message);
    }
    return res.json();
  }
}
