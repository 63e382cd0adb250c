// Pure numeric helpers shared by the UI and its tests.

export function clamp(value: number, lo: number, hi: number): number {
  if (Number.isNaN(value)) return lo;
  return Math.min(hi, Math.max(lo, value));
}

/** Nearest pre-rendered table for an interpolation position, ties round half up. */
export function nearestBankIndex(t: number, stepCount: number): number {
  const clamped = clamp(t, 0, 1);
  return Math.min(stepCount - 1, Math.floor(clamped * (stepCount - 1) + 0.5));
}

/** Equal-temperament pitch, A4 = MIDI 69 = 440 Hz (mirrors the backend). */
export function midiToHz(note: number): number {
  return 440.0 * Math.pow(2, (note - 69) / 12);
}

/** Playback rate that loops a table of `tableLen` samples `freqHz` times per second. */
export function loopPlaybackRate(freqHz: number, tableLen: number, sampleRate: number): number {
  return (freqHz * tableLen) / sampleRate;
}
