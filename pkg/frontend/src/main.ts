import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { SessionStore } from "./state.js";

const store = new SessionStore(window.sessionStorage);
const api = new ApiClient("", () => app.onUnauthorized());
const app = new App(document, api, store);
app.start();

// defaults for the documented demo account; edit freely
const userInput = document.getElementById("login-username") as HTMLInputElement | null;
if (userInput && !userInput.value) userInput.value = "EMBC";
