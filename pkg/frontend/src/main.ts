import { ServiceClient } from "./api.js";
import { mount } from "./app.js";

// Annotator identity: ?annotator=... wins, then the last one used on this
// browser, then a plain default. Kept in localStorage so reloads stay "you".
function annotatorId(): string {
  const fromUrl = new URLSearchParams(window.location.search).get("annotator");
  if (fromUrl) {
    localStorage.setItem("annotator-id", fromUrl);
    return fromUrl;
  }
  return localStorage.getItem("annotator-id") ?? "anon";
}

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
mount(root, new ServiceClient(""), annotatorId());
