// SVG map rendering: occupancy cells, executed trail, current plan,
// queued waypoints, candidate markers, the robot.
//
// Everything is drawn in world meters inside a y-flipped group, so all
// geometry code can use world coordinates directly.

import { OCCUPIED, UNKNOWN, type OccGrid } from "./occ.js";
import type { CandidateView, QueueEntry } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function polyPoints(points: Array<[number, number]>): string {
  return points.map(([x, y]) => `${x},${y}`).join(" ");
}

export class MapView {
  readonly svg: SVGSVGElement;
  private readonly world: SVGGElement;
  private readonly occupiedPath: SVGPathElement;
  private readonly unknownPath: SVGPathElement;
  private readonly trail: SVGPolylineElement;
  private readonly plan: SVGPolylineElement;
  private readonly queueLayer: SVGGElement;
  private readonly candidateLayer: SVGGElement;
  private readonly robotDot: SVGCircleElement;
  private readonly robotHeading: SVGLineElement;
  private grid: OccGrid | null = null;

  constructor() {
    this.svg = el("svg", { class: "map-view", preserveAspectRatio: "xMidYMid meet" });
    this.world = el("g");
    this.svg.appendChild(this.world);

    this.occupiedPath = el("path", { class: "cells-occupied" });
    this.unknownPath = el("path", { class: "cells-unknown" });
    this.trail = el("polyline", { class: "trail", fill: "none" });
    this.plan = el("polyline", { class: "plan", fill: "none" });
    this.queueLayer = el("g", { class: "queue" });
    this.candidateLayer = el("g", { class: "candidates" });
    this.robotDot = el("circle", { class: "robot", r: "0.3" });
    this.robotHeading = el("line", { class: "robot-heading" });

    for (const node of [
      this.unknownPath, this.occupiedPath, this.trail, this.plan,
      this.queueLayer, this.candidateLayer, this.robotHeading, this.robotDot,
    ]) {
      this.world.appendChild(node);
    }
  }

  // Rebuild the static cell geometry; called only when the map digest
  // changes, not on every snapshot.
  setGrid(grid: OccGrid): void {
    this.grid = grid;
    const w = grid.width * grid.resolution;
    const h = grid.height * grid.resolution;
    this.svg.setAttribute("viewBox", `${grid.originX} ${grid.originY} ${w} ${h}`);
    // Flip y: world y up, SVG y down.
    this.world.setAttribute(
      "transform",
      `translate(0 ${2 * grid.originY + h}) scale(1 -1)`,
    );
    this.occupiedPath.setAttribute("d", this.cellsPath(grid, OCCUPIED));
    this.unknownPath.setAttribute("d", this.cellsPath(grid, UNKNOWN));
    const stroke = Math.max(0.04, grid.resolution * 0.16);
    this.trail.setAttribute("stroke-width", `${stroke}`);
    this.plan.setAttribute("stroke-width", `${stroke}`);
    this.robotDot.setAttribute("r", `${grid.resolution * 0.6}`);
    this.robotHeading.setAttribute("stroke-width", `${stroke}`);
  }

  private cellsPath(grid: OccGrid, state: number): string {
    const res = grid.resolution;
    const parts: string[] = [];
    for (let r = 0; r < grid.height; r++) {
      // Merge horizontal runs into single rectangles to keep the path small.
      let run = -1;
      for (let c = 0; c <= grid.width; c++) {
        const hit = c < grid.width && grid.cells[r * grid.width + c] === state;
        if (hit && run < 0) run = c;
        if (!hit && run >= 0) {
          const x = grid.originX + run * res;
          const y = grid.originY + r * res;
          parts.push(`M${x} ${y}h${(c - run) * res}v${res}h${-(c - run) * res}z`);
          run = -1;
        }
      }
    }
    return parts.join("");
  }

  setTrail(points: Array<[number, number]>): void {
    this.trail.setAttribute("points", polyPoints(points));
  }

  setPlan(poses: Array<[number, number]> | null): void {
    this.plan.setAttribute("points", poses ? polyPoints(poses) : "");
  }

  setQueue(entries: QueueEntry[]): void {
    this.queueLayer.replaceChildren();
    const r = (this.grid?.resolution ?? 0.25) * 0.45;
    for (const entry of entries) {
      const marker = el("circle", {
        class: entry.label.startsWith("feedback-") ? "wp wp-spliced" : "wp",
        cx: `${entry.x}`, cy: `${entry.y}`, r: `${r}`,
      });
      const title = el("title");
      title.textContent = entry.label;
      marker.appendChild(title);
      this.queueLayer.appendChild(marker);
    }
  }

  setCandidates(layers: CandidateView[][] | null): void {
    this.candidateLayer.replaceChildren();
    if (!layers) return;
    const s = (this.grid?.resolution ?? 0.25) * 0.5;
    for (const layer of layers) {
      for (const cand of layer) {
        const cross = el("path", {
          class: "candidate",
          d: `M${cand.x - s} ${cand.y - s}L${cand.x + s} ${cand.y + s}` +
             `M${cand.x - s} ${cand.y + s}L${cand.x + s} ${cand.y - s}`,
          "stroke-width": `${s * 0.4}`,
        });
        const title = el("title");
        title.textContent = `${cand.phrase} (${cand.clearance.toFixed(2)} m clear)`;
        cross.appendChild(title);
        this.candidateLayer.appendChild(cross);
      }
    }
  }

  setRobot(x: number, y: number, theta: number): void {
    const len = (this.grid?.resolution ?? 0.25) * 1.2;
    this.robotDot.setAttribute("cx", `${x}`);
    this.robotDot.setAttribute("cy", `${y}`);
    this.robotHeading.setAttribute("x1", `${x}`);
    this.robotHeading.setAttribute("y1", `${y}`);
    this.robotHeading.setAttribute("x2", `${x + Math.cos(theta) * len}`);
    this.robotHeading.setAttribute("y2", `${y + Math.sin(theta) * len}`);
  }
}
