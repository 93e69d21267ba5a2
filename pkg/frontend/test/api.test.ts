import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, Client } from "../src/api";

afterEach(() => {
  vi.unstubAllGlobals();
});

function capture(status = 200, body: unknown = []): string[] {
  const urls: string[] = [];
  vi.stubGlobal("fetch", async (input: RequestInfo | URL): Promise<Response> => {
    urls.push(String(input));
    return new Response(JSON.stringify(body), { status });
  });
  return urls;
}

describe("Client", () => {
  it("builds versioned URLs with encoded parameters", async () => {
    const urls = capture();
    const client = new Client("http://h:1");
    await client.searchEntities("tom cruise", "person");
    await client.recommendations("user with spaces", 5);
    await client.explanations("alice", "m/1");
    expect(urls[0]).toBe("http://h:1/v1/entities?q=tom+cruise&kind=person");
    expect(urls[1]).toBe(
      "http://h:1/v1/users/user%20with%20spaces/recommendations?k=5",
    );
    expect(urls[2]).toBe("http://h:1/v1/users/alice/explanations/m%2F1");
  });

  it("raises ApiError with the server detail", async () => {
    capture(422, { detail: "likesMovie requires a movie target" });
    const client = new Client("");
    const err = await client
      .postFeedback("alice", "likesMovie", "crime")
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(422);
    expect((err as ApiError).message).toContain("movie target");
  });

  it("tolerates non-JSON error bodies", async () => {
    vi.stubGlobal("fetch", async (): Promise<Response> =>
      new Response("<html>bad gateway</html>", { status: 502, statusText: "Bad Gateway" }),
    );
    const client = new Client("");
    const err = await client.health().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(502);
  });
});
