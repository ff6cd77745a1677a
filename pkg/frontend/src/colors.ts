/**
 * Color encodings. The heatmap uses a diverging blue-white-red map over
 * the clipped z range [-2.5, 2.5]: saturated blue at -2.5, neutral at 0,
 * saturated red at +2.5, interpolated linearly in RGB in between.
 */

export const Z_LIMIT = 2.5;

const BLUE: [number, number, number] = [33, 102, 172];
const NEUTRAL: [number, number, number] = [247, 247, 247];
const RED: [number, number, number] = [178, 24, 43];

export const CLUSTER_PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export const NOISE_COLOR = "#bbbbbb";

export function clusterColor(cluster: number): string {
  if (cluster < 0) {
    return NOISE_COLOR;
  }
  return CLUSTER_PALETTE[cluster % CLUSTER_PALETTE.length];
}

function mix(a: [number, number, number], b: [number, number, number],
             t: number): string {
  const ch = (i: number) => Math.round(a[i] + (b[i] - a[i]) * t);
  return `rgb(${ch(0)}, ${ch(1)}, ${ch(2)})`;
}

/** Pure, monotone map from a z value to its heatmap cell color. */
export function zColor(z: number): string {
  const clamped = Math.max(-Z_LIMIT, Math.min(Z_LIMIT, z));
  if (clamped < 0) {
    return mix(NEUTRAL, BLUE, -clamped / Z_LIMIT);
  }
  return mix(NEUTRAL, RED, clamped / Z_LIMIT);
}

export const SATURATED_BLUE = `rgb(${BLUE[0]}, ${BLUE[1]}, ${BLUE[2]})`;
export const SATURATED_RED = `rgb(${RED[0]}, ${RED[1]}, ${RED[2]})`;
export const NEUTRAL_COLOR = `rgb(${NEUTRAL[0]}, ${NEUTRAL[1]}, ${NEUTRAL[2]})`;
