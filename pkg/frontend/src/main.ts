// Browser entry point. The service address defaults to port 8750 on the
// host serving this page and can be overridden with ?server=http://host:port.

import { OperatorConsole } from "./console.js";

function serviceBase(): string {
  const param = new URLSearchParams(window.location.search).get("server");
  if (param) return param.replace(/\/+$/, "");
  const host = window.location.hostname || "127.0.0.1";
  return `http://${host}:8750`;
}

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const operatorConsole = new OperatorConsole(root, serviceBase());
void operatorConsole.connect();

// Handy for poking at the live state from the browser devtools.
declare global {
  interface Window {
    operatorConsole: OperatorConsole;
  }
}
window.operatorConsole = operatorConsole;
