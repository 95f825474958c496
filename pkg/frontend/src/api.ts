/** Thin typed client for the shotloc HTTP service.
 *
 * The bearer token lives in module memory only. Reloading the page drops it
 * and returns the user to the login screen; nothing is written to storage.
 */

let token: string | null = null;
let base = '';

export function configure(baseUrl: string, bearer: string): void {
  base = baseUrl.replace(/\/+$/, '');
  token = bearer;
}

export function hasToken(): boolean {
  return token !== null && token !== '';
}

export function clearToken(): void {
  token = null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
    this.name = 'ApiError';
  }
}

async function request(method: string, path: string, body?: unknown): Promise<Response> {
  const headers: Record<string, string> = { Authorization: `Bearer ${token ?? ''}` };
  if (body !== undefined) headers['Content-Type'] = 'application/json';
  const resp = await fetch(base + path, {
    method,
    headers,
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  if (!resp.ok) {
    let error = `http ${resp.status}`;
    let detail: unknown = resp.statusText;
    try {
      const payload = (await resp.json()) as Record<string, unknown>;
      if (typeof payload.error === 'string') error = payload.error;
      if (payload.detail !== undefined) detail = payload.detail;
    } catch {
      // non-JSON error body, keep the status text
    }
    const text = typeof detail === 'string' ? detail : JSON.stringify(detail);
    throw new ApiError(resp.status, error, text);
  }
  return resp;
}

export async function get<T>(path: string): Promise<T> {
  return (await request('GET', path)).json() as Promise<T>;
}

export async function getText(path: string): Promise<string> {
  return (await request('GET', path)).text();
}

export async function put<T>(path: string, body: unknown): Promise<T> {
  return (await request('PUT', path, body)).json() as Promise<T>;
}

export async function post<T>(path: string, body: unknown): Promise<T> {
  return (await request('POST', path, body)).json() as Promise<T>;
}
