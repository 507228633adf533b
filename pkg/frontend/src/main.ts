import { SteeringController } from "./input.js";
import { StreamClient } from "./net.js";
import { GaitName } from "./protocol.js";
import { buildScene, drawScene } from "./render.js";
import { createViewState, receiveFrame, setConnection } from "./state.js";

const view = createViewState();

const topCanvas = document.getElementById("top") as HTMLCanvasElement;
const sideCanvas = document.getElementById("side") as HTMLCanvasElement;
const topCtx = topCanvas.getContext("2d")!;
const sideCtx = sideCanvas.getContext("2d")!;

const hudEls = {
  gait: document.getElementById("hud-gait")!,
  bias: document.getElementById("hud-bias")!,
  speed: document.getElementById("hud-speed")!,
  reference: document.getElementById("hud-reference")!,
  turn: document.getElementById("hud-turn")!,
  fps: document.getElementById("hud-fps")!,
  status: document.getElementById("hud-status")!,
  notice: document.getElementById("hud-notice")!,
};

const proto = location.protocol === "https:" ? "wss:" : "ws:";
const client = new StreamClient(`${proto}//${location.host}/stream`, {
  onMessage(message) {
    if (message.type === "state") {
      receiveFrame(view, message, performance.now());
      controller.noteGait(message.gait);
    } else {
      view.notice = message.message;
    }
  },
  onStatus(status) {
    setConnection(view, status);
  },
});

const controller = new SteeringController((command) => {
  client.sendCommand(command);
});

window.addEventListener("keydown", (e) => {
  if (["ArrowLeft", "ArrowRight", " ", "r", "g"].includes(e.key)) {
    e.preventDefault();
    controller.keyDown(e.key);
  }
});
window.addEventListener("keyup", (e) => controller.keyUp(e.key));

const slider = document.getElementById("bias-slider") as HTMLInputElement;
slider.addEventListener("input", () => {
  // slider right is negative bias (turn right), so flip to stick convention
  controller.setAxis(-Number(slider.value) / 100);
});
for (const ev of ["pointerup", "pointercancel", "mouseleave"]) {
  slider.addEventListener(ev, () => {
    slider.value = "0";
    controller.setAxis(0); // spring back to center
  });
}

(document.getElementById("btn-run") as HTMLButtonElement).addEventListener(
  "click", () => controller.toggleRun());
(document.getElementById("btn-reset") as HTMLButtonElement).addEventListener(
  "click", () => controller.reset());
for (const gait of ["forward", "backward", "sidewinding"] as GaitName[]) {
  (document.getElementById(`btn-${gait}`) as HTMLButtonElement).addEventListener(
    "click", () => controller.selectGait(gait));
}
(document.getElementById("follow") as HTMLInputElement).addEventListener(
  "change", (e) => {
    view.camera.follow = (e.target as HTMLInputElement).checked;
  });

function pollGamepad(): void {
  if (!navigator.getGamepads) return;
  const pad = Array.from(navigator.getGamepads()).find((p) => p !== null);
  if (!pad) return;
  const x = pad.axes[0] ?? 0;
  // small dead zone, left deflection is +bias
  controller.setAxis(Math.abs(x) < 0.08 ? 0 : -x);
}

function loop(): void {
  const now = performance.now();
  pollGamepad();
  controller.tick(now);
  const scene = buildScene(
    view, now, topCanvas.width, topCanvas.height, sideCanvas.width, sideCanvas.height);
  drawScene(topCtx, sideCtx, scene);
  hudEls.gait.textContent = scene.hud.gait;
  hudEls.bias.textContent = scene.hud.bias;
  hudEls.speed.textContent = scene.hud.speed;
  hudEls.reference.textContent = scene.hud.reference;
  hudEls.turn.textContent = scene.hud.turn;
  hudEls.fps.textContent = `${scene.hud.fps} fps`;
  hudEls.status.textContent = scene.hud.connection;
  hudEls.status.className = `status-${scene.hud.connection}`;
  hudEls.notice.textContent = scene.hud.notice ?? "";
  requestAnimationFrame(loop);
}

client.connect();
requestAnimationFrame(loop);
