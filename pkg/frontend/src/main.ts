/** Browser entry point: bind the controller to the static page shell. */

import { Client } from "./api.js";
import { Session } from "./controller.js";
import { renderApp } from "./render.js";

function start(): void {
  const root = document.getElementById("app");
  const searchBox = document.getElementById("search") as HTMLInputElement | null;
  const userBox = document.getElementById("user") as HTMLInputElement | null;
  if (!root || !searchBox || !userBox) {
    throw new Error("page shell is missing #app, #search or #user");
  }
  const client = new Client("");
  let session = new Session(client, userBox.value || "alice", (view) => {
    root.innerHTML = renderApp(view);
  });
  void session.refresh();

  userBox.addEventListener("change", () => {
    session = new Session(client, userBox.value || "alice", (view) => {
      root.innerHTML = renderApp(view);
    });
    void session.refresh();
  });

  let debounce: number | undefined;
  searchBox.addEventListener("input", () => {
    window.clearTimeout(debounce);
    debounce = window.setTimeout(() => void session.search(searchBox.value), 150);
  });

  root.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button.thumb");
    if (!(button instanceof HTMLButtonElement)) {
      return;
    }
    const id = button.dataset.id ?? "";
    const polarity = button.dataset.action === "dislike" ? "dislike" : "like";
    const hit = session.view.searchResults.find((entry) => entry.id === id);
    if (hit) {
      void session.addFeedback(hit, polarity);
    }
  });
}

document.addEventListener("DOMContentLoaded", start);
