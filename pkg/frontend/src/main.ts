/** Studio app wiring: 2D pattern canvas + parameter panel + 3D preview. */

import { DesignClient, ServiceError } from "./api.js";
import {
  EditorState,
  Tool,
  applyMargin,
  applyRadialDeform,
  applyTile,
  cancelDraft,
  clickVertex,
  commitLine,
  initialState,
  markSimulated,
  removeLine,
  selectTool,
} from "./editor.js";
import { parseObj } from "./obj.js";
import {
  emptyPattern,
  gridVertices,
  hitTest,
  parsePattern,
  serializePattern,
} from "./pattern.js";
import { GRAPH_PALETTE } from "./overlays.js";
import { DiagnosticsDoc, SolverParams } from "./types.js";
import { MeshViewer, Overlay } from "./viewer.js";

const SCALE = 48; // pattern units -> pixels
const PAD = 24;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class StudioApp {
  private state: EditorState;
  private client: DesignClient;
  private sessionId: string | null = null;
  private simulating = false;
  private lastDiagnostics: DiagnosticsDoc | null = null;
  private hoveredLine: number | null = null;
  private viewer: MeshViewer;
  private canvas2d = el<HTMLCanvasElement>("pattern-canvas");

  constructor(baseUrl: string) {
    this.client = new DesignClient(baseUrl);
    this.state = initialState(
      emptyPattern({ kind: "square", cols: 6, rows: 6, spacing: 1 }),
    );
    this.viewer = new MeshViewer(el<HTMLCanvasElement>("preview-canvas"));
    this.bind();
    this.redraw();
  }

  private setState(next: EditorState): void {
    const docChanged = next.doc !== this.state.doc;
    this.state = next;
    if (docChanged) {
      // the stored result describes the old pattern now
      this.lastDiagnostics = null;
      this.viewer.clear();
      void this.pushPattern();
    }
    this.redraw();
  }

  private bind(): void {
    for (const tool of [
      "draw_line",
      "delete_line",
      "tile",
      "margin",
      "radial_deform",
      "insert_pleat",
    ] as Tool[]) {
      el<HTMLButtonElement>(`tool-${tool}`).addEventListener("click", () =>
        this.setState(selectTool(this.state, tool)),
      );
    }
    this.canvas2d.addEventListener("click", (e) => this.onCanvasClick(e));
    el<HTMLButtonElement>("commit-line").addEventListener("click", () =>
      this.setState(commitLine(this.state)),
    );
    el<HTMLButtonElement>("cancel-line").addEventListener("click", () =>
      this.setState(cancelDraft(this.state)),
    );
    el<HTMLButtonElement>("apply-tile").addEventListener("click", () =>
      this.setState(
        applyTile(this.state, {
          reps_x: Number(el<HTMLInputElement>("tile-x").value),
          reps_y: Number(el<HTMLInputElement>("tile-y").value),
          shift: Number(el<HTMLInputElement>("tile-shift").value),
        }),
      ),
    );
    el<HTMLButtonElement>("apply-margin").addEventListener("click", () =>
      this.setState(
        applyMargin(this.state, Number(el<HTMLInputElement>("margin-cells").value)),
      ),
    );
    el<HTMLButtonElement>("apply-deform").addEventListener("click", () => {
      const r = Number(el<HTMLInputElement>("deform-radius").value);
      this.setState(applyRadialDeform(this.state, r > 0 ? r : null));
    });
    el<HTMLButtonElement>("simulate").addEventListener("click", () =>
      void this.simulate(),
    );
    el<HTMLButtonElement>("download-obj").addEventListener("click", () =>
      void this.downloadObj(),
    );
    el<HTMLButtonElement>("flip").addEventListener("click", () =>
      this.viewer.flip(),
    );
    el<HTMLSelectElement>("overlay").addEventListener("change", (e) =>
      this.viewer.applyOverlay((e.target as HTMLSelectElement).value as Overlay),
    );
    el<HTMLButtonElement>("export-pattern").addEventListener("click", () =>
      this.download("pattern.json", serializePattern(this.state.doc)),
    );
    el<HTMLInputElement>("import-pattern").addEventListener("change", async (e) => {
      const file = (e.target as HTMLInputElement).files?.[0];
      if (!file) return;
      try {
        this.setState(initialState(parsePattern(await file.text())));
        this.sessionId = null;
      } catch (exc) {
        this.showError(String(exc));
      }
    });
  }

  /** Current solver params from the panel. */
  private panelParams(): SolverParams {
    const params: SolverParams = {
      w_embed: Number(el<HTMLInputElement>("w-embed").value),
      w_height: Number(el<HTMLInputElement>("w-height").value),
      subdivision: Number(el<HTMLInputElement>("subdivision").value),
    };
    if (el<HTMLInputElement>("progressive-eps").checked) {
      params.epsilon_schedule = [1, 0.5, 0.25, 0.1, 0];
    }
    return params;
  }

  private onCanvasClick(e: MouseEvent): void {
    const rect = this.canvas2d.getBoundingClientRect();
    const p = {
      x: (e.clientX - rect.left - PAD) / SCALE,
      y: (this.canvas2d.height - (e.clientY - rect.top) - PAD) / SCALE,
    };
    const verts = gridVertices(this.state.doc.grid);
    const hit = hitTest(verts, p, 0.35);
    if (hit === null) return;
    if (this.state.tool === "draw_line") {
      this.setState(clickVertex(this.state, hit));
    } else if (this.state.tool === "delete_line") {
      const idx = this.state.doc.lines.findIndex((l) => l.includes(hit));
      if (idx >= 0) this.setState(removeLine(this.state, idx));
    }
  }

  private async ensureSession(): Promise<string> {
    if (this.sessionId === null) {
      this.sessionId = await this.client.createSession(this.state.doc);
    }
    return this.sessionId;
  }

  private async pushPattern(): Promise<void> {
    if (this.sessionId === null) return;
    try {
      await this.client.putPattern(this.sessionId, this.state.doc);
    } catch (exc) {
      this.showError(String(exc));
    }
  }

  /** One in-flight simulation; the button stays disabled while pending. */
  private async simulate(): Promise<void> {
    if (this.simulating) return;
    this.simulating = true;
    this.redraw();
    try {
      const sid = await this.ensureSession();
      await this.client.putPattern(sid, this.state.doc);
      this.lastDiagnostics = await this.client.simulate(sid, this.panelParams());
      const obj = await this.client.mesh(sid, "merged");
      this.viewer.setMesh(parseObj(obj));
      this.setState(markSimulated(this.state));
    } catch (exc) {
      if (exc instanceof ServiceError && exc.body.pointer) {
        this.showError(`${exc.body.pointer}: ${exc.body.message}`);
      } else {
        this.showError(String(exc));
      }
    } finally {
      this.simulating = false;
      this.redraw();
    }
  }

  private async downloadObj(): Promise<void> {
    if (this.sessionId === null || this.lastDiagnostics === null) return;
    this.download("smocked.obj", await this.client.mesh(this.sessionId, "merged"));
  }

  private download(name: string, text: string): void {
    const a = document.createElement("a");
    a.href = URL.createObjectURL(new Blob([text]));
    a.download = name;
    a.click();
    URL.revokeObjectURL(a.href);
  }

  private showError(message: string): void {
    el<HTMLElement>("status").textContent = message;
  }

  private redraw(): void {
    this.drawPattern();
    this.renderPanel();
  }

  private drawPattern(): void {
    const ctx = this.canvas2d.getContext("2d");
    if (!ctx) return;
    const { doc, draft, lastRejection } = this.state;
    const verts = gridVertices(doc.grid);
    const H = this.canvas2d.height;
    const px = (x: number) => PAD + x * SCALE;
    const py = (y: number) => H - PAD - y * SCALE;
    ctx.clearRect(0, 0, this.canvas2d.width, H);

    ctx.fillStyle = "#888";
    for (const v of verts) {
      ctx.beginPath();
      ctx.arc(px(v.x), py(v.y), 3, 0, 2 * Math.PI);
      ctx.fill();
    }
    doc.lines.forEach((line, k) => {
      ctx.strokeStyle = k === this.hoveredLine ? "#ff5722" : GRAPH_PALETTE.underlayEdge;
      ctx.lineWidth = 2.5;
      ctx.beginPath();
      line.forEach((v, i) => {
        const p = verts[v];
        if (!p) return;
        if (i === 0) ctx.moveTo(px(p.x), py(p.y));
        else ctx.lineTo(px(p.x), py(p.y));
      });
      ctx.stroke();
    });
    if (draft.length) {
      ctx.strokeStyle = GRAPH_PALETTE.pleatNode;
      ctx.setLineDash([5, 4]);
      ctx.lineWidth = 2;
      ctx.beginPath();
      draft.forEach((v, i) => {
        const p = verts[v];
        if (!p) return;
        if (i === 0) ctx.moveTo(px(p.x), py(p.y));
        else ctx.lineTo(px(p.x), py(p.y));
      });
      ctx.stroke();
      ctx.setLineDash([]);
    }
    if (lastRejection?.conflictVertex !== undefined) {
      const p = verts[lastRejection.conflictVertex];
      if (p) {
        ctx.strokeStyle = "#d32f2f";
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.arc(px(p.x), py(p.y), 9, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
  }

  private renderPanel(): void {
    el<HTMLButtonElement>("simulate").disabled = this.simulating;
    el<HTMLButtonElement>("download-obj").disabled =
      this.lastDiagnostics === null;
    el<HTMLElement>("dirty-flag").textContent = this.state.dirty
      ? "edited since last simulation"
      : "up to date";
    el<HTMLElement>("status").textContent = this.simulating
      ? "simulating…"
      : this.state.lastRejection?.reason ?? "";

    const diagBox = el<HTMLElement>("diagnostics");
    if (this.lastDiagnostics) {
      // classification and numbers straight from the service, verbatim
      diagBox.textContent = JSON.stringify(this.lastDiagnostics, null, 2);
    } else {
      diagBox.textContent = this.state.dirty
        ? "result invalidated — re-simulate"
        : "no result yet";
    }

    const list = el<HTMLElement>("line-list");
    list.innerHTML = "";
    this.state.doc.lines.forEach((line, k) => {
      const item = document.createElement("li");
      item.textContent = `line ${k}: [${line.join(", ")}]`;
      item.addEventListener("mouseenter", () => {
        this.hoveredLine = k;
        this.drawPattern();
      });
      item.addEventListener("mouseleave", () => {
        this.hoveredLine = null;
        this.drawPattern();
      });
      list.appendChild(item);
    });
  }
}

declare global {
  interface Window {
    studio?: StudioApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("pattern-canvas")) {
  window.studio = new StudioApp(
    new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8080",
  );
}
