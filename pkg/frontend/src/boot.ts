import { initApp } from "./main.js";

initApp(document).catch((e) => {
  const banner = document.getElementById("error-banner");
  const text = document.getElementById("error-text");
  if (banner && text) {
    banner.hidden = false;
    text.textContent = `advisor unavailable: ${e instanceof Error ? e.message : e}`;
  }
});
