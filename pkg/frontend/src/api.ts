// Typed client for the synthesis service.

export interface Preset {
  name: string;
  latent: number[];
}

export interface TableResponse {
  samples: number[];
  source?: string;
  t?: number;
}

export interface BankInfo {
  name: string;
  step_count: number;
  labels: [string, string];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class SynthApi {
  constructor(private readonly base = "") {}

  async presets(): Promise<Preset[]> {
    const body = await asJson<{ presets: Preset[] }>(await fetch(`${this.base}/api/presets`));
    return body.presets;
  }

  async interp(a: string, b: string, t: number): Promise<TableResponse> {
    const resp = await fetch(`${this.base}/api/interp`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ a, b, t }),
    });
    return asJson<TableResponse>(resp);
  }

  async banks(): Promise<BankInfo[]> {
    const body = await asJson<{ banks: BankInfo[] }>(await fetch(`${this.base}/api/banks`));
    return body.banks;
  }

  async bankTable(name: string, index: number): Promise<TableResponse> {
    return asJson<TableResponse>(
      await fetch(`${this.base}/api/banks/${encodeURIComponent(name)}/tables/${index}`),
    );
  }
}
