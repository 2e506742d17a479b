/** Canvas scatter view for image-less datasets. The coordinates arrive
 * already projected (server-side PCA); this only scales them to the canvas. */

import type { Coords } from "./types.js";

export function drawScatter(canvas: HTMLCanvasElement, coords: Coords): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);

  const points: [number, number][] = [...coords.cluster, coords.point];
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const pad = 14;
  const sx = (x: number) => pad + ((x - minX) / spanX) * (width - 2 * pad);
  const sy = (y: number) => pad + ((y - minY) / spanY) * (height - 2 * pad);

  ctx.fillStyle = "#8ab4d8";
  for (const [x, y] of coords.cluster) {
    ctx.beginPath();
    ctx.arc(sx(x), sy(y), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  // The medoid sample itself, highlighted.
  ctx.fillStyle = "#d84315";
  ctx.beginPath();
  ctx.arc(sx(coords.point[0]), sy(coords.point[1]), 6, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = "#5d1a05";
  ctx.lineWidth = 1.5;
  ctx.stroke();
}
