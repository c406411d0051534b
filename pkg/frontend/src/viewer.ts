/** three.js mesh preview: orbit/zoom camera, overlay recoloring, flip. */

import * as THREE from "three";

import { ParsedMesh, heightChannel } from "./obj.js";
import { fieldColors } from "./overlays.js";

export type Overlay = "none" | "height" | "energy";

export class MeshViewer {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private mesh: THREE.Mesh | null = null;
  private parsed: ParsedMesh | null = null;
  private energyField: Float32Array | null = null;
  private overlay: Overlay = "none";
  private orbit = { theta: 0.6, phi: 1.1, radius: 10, target: new THREE.Vector3() };

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(
      45,
      canvas.clientWidth / Math.max(canvas.clientHeight, 1),
      0.01,
      1000,
    );
    this.scene.background = new THREE.Color(0xf4f4f4);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(3, 5, 8);
    this.scene.add(sun);
    this.bindControls();
  }

  setMesh(parsed: ParsedMesh, energyField: Float32Array | null = null): void {
    this.parsed = parsed;
    this.energyField = energyField;
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
    }
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position", new THREE.BufferAttribute(parsed.positions, 3));
    geo.setIndex(new THREE.BufferAttribute(parsed.indices, 1));
    geo.computeVertexNormals();
    const mat = new THREE.MeshStandardMaterial({
      side: THREE.DoubleSide,
      vertexColors: false,
      color: 0xd9cfc2,
      roughness: 0.85,
    });
    this.mesh = new THREE.Mesh(geo, mat);
    this.scene.add(this.mesh);
    geo.computeBoundingSphere();
    const bs = geo.boundingSphere;
    if (bs) {
      this.orbit.target.copy(bs.center);
      this.orbit.radius = bs.radius * 2.5;
    }
    this.applyOverlay(this.overlay);
    this.render();
  }

  /** Recolor from a vertex channel already in hand — no service round trip. */
  applyOverlay(overlay: Overlay): void {
    this.overlay = overlay;
    if (!this.mesh || !this.parsed) return;
    const mat = this.mesh.material as THREE.MeshStandardMaterial;
    let field: Float32Array | null = null;
    if (overlay === "height") field = heightChannel(this.parsed);
    if (overlay === "energy") field = this.energyField;
    if (field) {
      this.mesh.geometry.setAttribute(
        "color",
        new THREE.BufferAttribute(fieldColors(field), 3),
      );
      mat.vertexColors = true;
      mat.color.set(0xffffff);
    } else {
      mat.vertexColors = false;
      mat.color.set(0xd9cfc2);
    }
    mat.needsUpdate = true;
    this.render();
  }

  /** Front/back flip. */
  flip(): void {
    if (!this.mesh) return;
    this.mesh.rotation.y += Math.PI;
    this.render();
  }

  clear(): void {
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
      this.mesh = null;
      this.parsed = null;
    }
    this.render();
  }

  private bindControls(): void {
    let dragging = false;
    let last = { x: 0, y: 0 };
    this.canvas.addEventListener("pointerdown", (e) => {
      dragging = true;
      last = { x: e.clientX, y: e.clientY };
    });
    window.addEventListener("pointerup", () => (dragging = false));
    window.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      this.orbit.theta -= (e.clientX - last.x) * 0.008;
      this.orbit.phi = Math.min(
        Math.PI - 0.05,
        Math.max(0.05, this.orbit.phi - (e.clientY - last.y) * 0.008),
      );
      last = { x: e.clientX, y: e.clientY };
      this.render();
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.orbit.radius *= Math.exp(e.deltaY * 0.001);
      this.render();
    });
  }

  render(): void {
    const { theta, phi, radius, target } = this.orbit;
    this.camera.position.set(
      target.x + radius * Math.sin(phi) * Math.cos(theta),
      target.y + radius * Math.sin(phi) * Math.sin(theta),
      target.z + radius * Math.cos(phi),
    );
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(target);
    const w = this.canvas.clientWidth;
    const h = Math.max(this.canvas.clientHeight, 1);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(w, h, false);
    this.renderer.render(this.scene, this.camera);
  }
}
