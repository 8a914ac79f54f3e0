// Unit policy: radians on the wire, degrees in angle inputs. Lengths, reach
// bounds and masses are rendered verbatim from server responses; the UI never
// recomputes or rounds a server-derived quantity.

export function radToDeg(rad: number): number {
  return (rad * 180) / Math.PI;
}

export function degToRad(deg: number): number {
  return (deg * Math.PI) / 180;
}

/** Display a server-sourced quantity exactly as the server sent it. */
export function verbatim(value: number): string {
  return String(value);
}

export function meters(value: number): string {
  return `${verbatim(value)} m`;
}

export function millis(value: number): string {
  return `${value.toFixed(2)} ms`;
}
