import { SessionClient } from "./api.js";
import { SessionApp, collectElements } from "./app.js";
import { renderBanner } from "./render.js";

// Browser entry point. Query parameters:
//   ?api=http://127.0.0.1:8000   service base URL (defaults to port 8000 on this host)
//   ?session=<id>                attach to an existing session instead of creating one

function defaultApiBase(): string {
  const host = location.hostname || "127.0.0.1";
  return `${location.protocol === "https:" ? "https:" : "http:"}//${host}:8000`;
}

async function boot(client: SessionClient, sessionId: string): Promise<void> {
  const shell = document.getElementById("app-shell");
  const creator = document.getElementById("session-creator");
  if (shell) shell.hidden = false;
  if (creator) creator.hidden = true;
  const app = new SessionApp(client, collectElements(document), sessionId);
  await app.attach();
  void app.startStream();
  app.startResync();
}

function showFatal(message: string): void {
  const banner = document.getElementById("banner");
  if (banner) banner.innerHTML = renderBanner("error", message);
}

function wireCreator(client: SessionClient): void {
  const form = document.getElementById("session-creator-form") as HTMLFormElement | null;
  if (!form) return;
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const topic = (document.getElementById("topic-input") as HTMLInputElement).value.trim();
    const goal = (document.getElementById("goal-input") as HTMLInputElement).value.trim();
    if (!topic) return;
    client
      .createSession(topic, goal)
      .then((created) => {
        const params = new URLSearchParams(location.search);
        params.set("session", created.session_id);
        history.replaceState(null, "", `${location.pathname}?${params}`);
        return boot(client, created.session_id);
      })
      .catch((err) => showFatal(err instanceof Error ? err.message : "failed to create session"));
  });
}

const params = new URLSearchParams(location.search);
const client = new SessionClient(params.get("api") ?? defaultApiBase());
const sessionId = params.get("session");
if (sessionId) {
  boot(client, sessionId).catch((err) =>
    showFatal(err instanceof Error ? err.message : "failed to attach to session"),
  );
} else {
  wireCreator(client);
}
