/** Geometry for the 11-axis evaluation radar. Pure math, no DOM. */

import type { EvaluationReport } from "./types.js";

export interface RadarAxis {
  key: string;
  label: string;
  score: number;
  justification: string;
  /** Axis endpoint at full scale. */
  x: number;
  y: number;
  labelX: number;
  labelY: number;
}

export interface RadarChart {
  axes: RadarAxis[];
  /** SVG points string for the score polygon. */
  polygon: string;
  /** Concentric guide rings, one per score step. */
  rings: string[];
  overall: number;
  center: number;
  radius: number;
}

const MAX_SCORE = 5;

function axisLabel(key: string): string {
  return key.replace(/_/g, " ");
}

function point(center: number, radius: number, angle: number): [number, number] {
  return [center + radius * Math.cos(angle), center + radius * Math.sin(angle)];
}

export function radarChart(report: EvaluationReport, size = 320): RadarChart {
  const center = size / 2;
  const radius = center - 40;
  const keys = Object.keys(report.entries);
  const axes: RadarAxis[] = keys.map((key, i) => {
    const angle = -Math.PI / 2 + (2 * Math.PI * i) / keys.length;
    const entry = report.entries[key]!;
    const [x, y] = point(center, radius, angle);
    const [labelX, labelY] = point(center, radius + 18, angle);
    return {
      key,
      label: axisLabel(key),
      score: entry.score,
      justification: entry.justification,
      x,
      y,
      labelX,
      labelY,
    };
  });

  const polygon = keys
    .map((key, i) => {
      const angle = -Math.PI / 2 + (2 * Math.PI * i) / keys.length;
      const score = report.entries[key]!.score;
      const [x, y] = point(center, (radius * score) / MAX_SCORE, angle);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");

  const rings: string[] = [];
  for (let step = 1; step <= MAX_SCORE; step++) {
    rings.push(
      keys
        .map((_, i) => {
          const angle = -Math.PI / 2 + (2 * Math.PI * i) / keys.length;
          const [x, y] = point(center, (radius * step) / MAX_SCORE, angle);
          return `${x.toFixed(1)},${y.toFixed(1)}`;
        })
        .join(" "),
    );
  }

  return { axes, polygon, rings, overall: report.overall, center, radius };
}
