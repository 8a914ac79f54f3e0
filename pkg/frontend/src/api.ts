import type {
  ApiErrorBody,
  Catalog,
  DiscoverResponse,
  FkResponse,
  ReachResponse,
  SessionState,
} from './types';

export class ApiError extends Error {
  status: number;
  stage: string;
  entity: string | null;

  constructor(status: number, body: ApiErrorBody | null) {
    super(body?.error?.message ?? `request failed with status ${status}`);
    this.status = status;
    this.stage = body?.error?.stage ?? 'request';
    this.entity = body?.error?.entity ?? null;
  }
}

async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
  const response = await fetch(path, {
    method,
    headers: body !== undefined ? { 'Content-Type': 'application/json' } : undefined,
    body: body !== undefined ? JSON.stringify(body) : undefined,
  });
  if (!response.ok) {
    let parsed: ApiErrorBody | null = null;
    try {
      parsed = (await response.json()) as ApiErrorBody;
    } catch {
      parsed = null;
    }
    throw new ApiError(response.status, parsed);
  }
  return (await response.json()) as T;
}

export interface AttachRequest {
  module_id: string;
  parent_instance?: string | null;
  parent_connector?: string | null;
  instance_id?: string;
}

export const api = {
  getCatalog: () => request<Catalog>('GET', '/v1/catalog'),

  createSession: () => request<SessionState>('POST', '/v1/sessions'),

  getSession: (id: string) => request<SessionState>('GET', `/v1/sessions/${id}`),

  deleteSession: (id: string) =>
    request<{ deleted: string }>('DELETE', `/v1/sessions/${id}`),

  attach: (id: string, body: AttachRequest) =>
    request<SessionState & { instance_id: string }>(
      'POST', `/v1/sessions/${id}/attach`, body),

  detach: (id: string, instanceId: string) =>
    request<SessionState & { removed: string[] }>(
      'POST', `/v1/sessions/${id}/detach`, { instance_id: instanceId }),

  setCustomization: (
    id: string,
    customization: { homing: Record<string, number>; addons: unknown[] },
  ) => request<SessionState>('PUT', `/v1/sessions/${id}/customization`, customization),

  discover: (id: string) => request<DiscoverResponse>('POST', `/v1/sessions/${id}/discover`),

  fk: (id: string, frame: string, q: number[]) =>
    request<FkResponse>(
      'GET',
      `/v1/sessions/${id}/fk?frame=${encodeURIComponent(frame)}&q=${q.join(',')}`,
    ),

  reach: (id: string, chain: string, samples?: number) =>
    request<ReachResponse>(
      'GET',
      `/v1/sessions/${id}/reach?chain=${encodeURIComponent(chain)}` +
        (samples ? `&samples=${samples}` : ''),
    ),
};

export type Api = typeof api;
