/** Shared test plumbing: a strict fetch mock that records every call. */

export interface Call {
  method: string;
  path: string;
  body: unknown;
}

export type Route = (path: string, body: unknown) => unknown;

export function mockFetch(routes: Record<string, Route>) {
  const calls: Call[] = [];
  const fetcher = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    let body: unknown;
    if (typeof init?.body === "string") {
      try { body = JSON.parse(init.body); } catch { body = init.body; }
    }
    calls.push({ method, path: url, body });
    for (const [key, handler] of Object.entries(routes)) {
      const [routeMethod, prefix] = key.split(" ", 2);
      if (method === routeMethod && url.startsWith(prefix)) {
        const payload = handler(url, body);
        const text = typeof payload === "string" ? payload : JSON.stringify(payload);
        return new Response(text, { status: 200 });
      }
    }
    throw new Error(`unmocked request: ${method} ${url}`);
  }) as typeof fetch;
  return { fetcher, calls };
}

export function container(): HTMLElement {
  const node = document.createElement("div");
  document.body.append(node);
  return node;
}
