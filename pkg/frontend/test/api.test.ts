import { afterEach, describe, expect, it, vi } from 'vitest';

import * as api from '../src/api.js';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

describe('api client', () => {
  afterEach(() => {
    vi.unstubAllGlobals();
    api.clearToken();
  });

  it('sends the bearer token on every request and holds it in memory only', async () => {
    const fetchMock = vi.fn(async () => jsonResponse(200, { ok: true }));
    vi.stubGlobal('fetch', fetchMock);
    api.configure('http://svc:8000/', 'sekrit');
    expect(api.hasToken()).toBe(true);

    await api.get('/collections');
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe('http://svc:8000/collections');
    expect((init.headers as Record<string, string>).Authorization).toBe('Bearer sekrit');

    api.clearToken();
    expect(api.hasToken()).toBe(false);
  });

  it('raises ApiError with the service error envelope', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn(async () => jsonResponse(409, { error: 'Conflict', detail: 'version 3 expected, found 5' })),
    );
    api.configure('', 't');
    const err = await api.put('/videos/v1/camera-fix', {}).catch((e: unknown) => e);
    expect(err).toBeInstanceOf(api.ApiError);
    const apiErr = err as api.ApiError;
    expect(apiErr.status).toBe(409);
    expect(apiErr.error).toBe('Conflict');
    expect(apiErr.detail).toContain('version 3 expected');
    expect(apiErr.message).toBe('Conflict: version 3 expected, found 5');
  });

  it('stringifies structured validation details', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn(async () => jsonResponse(422, { detail: [{ loc: ['body', 'video'], msg: 'Field required' }] })),
    );
    api.configure('', 't');
    const err = (await api.post('/collections/c1/jobs/estimate_m1', {}).catch((e: unknown) => e)) as api.ApiError;
    expect(err.status).toBe(422);
    expect(err.detail).toContain('Field required');
  });

  it('serializes request bodies and parses text endpoints', async () => {
    const fetchMock = vi.fn(async (url: string) => {
      if (url.endsWith('/spectrogram')) return new Response('#griddump v1\n', { status: 200 });
      return jsonResponse(200, {});
    });
    vi.stubGlobal('fetch', fetchMock);
    api.configure('', 't');

    await api.put('/videos/v1/markings', { markings: [{ event: 0, shock: 1.0, muzzle: 2.0 }], version: 1 });
    const [, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(JSON.parse(init.body as string).markings[0].muzzle).toBe(2.0);
    expect((init.headers as Record<string, string>)['Content-Type']).toBe('application/json');

    const text = await api.getText('/videos/v1/spectrogram');
    expect(text.startsWith('#griddump v1')).toBe(true);
  });
});
