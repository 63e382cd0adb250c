// Client-side wavetable playback: loop the current table in an AudioBuffer,
// shape it with a linear ADSR gain and a low-pass filter, and swap buffers
// under a short crossfade so table updates never click.

import { loopPlaybackRate, midiToHz } from "./mapping.js";

export interface EnvelopeSettings {
  attackS: number;
  decayS: number;
  sustainLevel: number;
  releaseS: number;
}

const CROSSFADE_S = 0.015; // <= 20 ms buffer swap

interface Voice {
  source: AudioBufferSourceNode;
  gain: GainNode;
}

export class LoopPlayer {
  private ctx: AudioContext | null = null;
  private filter: BiquadFilterNode | null = null;
  private envGain: GainNode | null = null;
  private voice: Voice | null = null;
  private table: Float32Array | null = null;
  private note = 69;
  private _playing = false;

  envelope: EnvelopeSettings = { attackS: 0.01, decayS: 0.1, sustainLevel: 0.8, releaseS: 0.2 };
  filterCutoffHz = 8000;

  get playing(): boolean {
    return this._playing;
  }

  get hasTable(): boolean {
    return this.table !== null;
  }

  /** Install a new table; if playing, swap the looping buffer with a crossfade. */
  setTable(samples: ArrayLike<number>): void {
    this.table = Float32Array.from(samples);
    if (this._playing && this.ctx) this.swapVoice();
  }

  setNote(note: number): void {
    this.note = note;
    if (this._playing && this.voice && this.ctx) {
      this.voice.source.playbackRate.setValueAtTime(this.rate(), this.ctx.currentTime);
    }
  }

  setFilterCutoff(hz: number): void {
    this.filterCutoffHz = hz;
    if (this.filter && this.ctx) {
      this.filter.frequency.setTargetAtTime(hz, this.ctx.currentTime, 0.01);
    }
  }

  play(note: number): void {
    if (!this.table) return;
    this.note = note;
    const ctx = this.ensureContext();
    if (ctx.state === "suspended") void ctx.resume();
    const now = ctx.currentTime;
    const env = this.envGain!;
    env.gain.cancelScheduledValues(now);
    env.gain.setValueAtTime(0, now);
    env.gain.linearRampToValueAtTime(1, now + this.envelope.attackS);
    env.gain.linearRampToValueAtTime(
      this.envelope.sustainLevel,
      now + this.envelope.attackS + this.envelope.decayS,
    );
    this.swapVoice();
    this._playing = true;
  }

  stop(): void {
    if (!this.ctx || !this._playing) return;
    const now = this.ctx.currentTime;
    const env = this.envGain!;
    env.gain.cancelScheduledValues(now);
    env.gain.setValueAtTime(env.gain.value, now);
    env.gain.linearRampToValueAtTime(0, now + this.envelope.releaseS);
    const voice = this.voice;
    if (voice) {
      voice.source.stop(now + this.envelope.releaseS + 0.05);
      this.voice = null;
    }
    this._playing = false;
  }

  private rate(): number {
    const ctx = this.ctx!;
    const len = this.table ? this.table.length : 514;
    return loopPlaybackRate(midiToHz(this.note), len, ctx.sampleRate);
  }

  private ensureContext(): AudioContext {
    if (!this.ctx) {
      this.ctx = new AudioContext();
      this.filter = this.ctx.createBiquadFilter();
      this.filter.type = "lowpass";
      this.filter.frequency.value = this.filterCutoffHz;
      this.envGain = this.ctx.createGain();
      this.envGain.gain.value = 0;
      this.envGain.connect(this.filter);
      this.filter.connect(this.ctx.destination);
    }
    return this.ctx;
  }

  /** Start a new looping voice on the current table, fading the old one out. */
  private swapVoice(): void {
    const ctx = this.ensureContext();
    const now = ctx.currentTime;
    const buffer = ctx.createBuffer(1, this.table!.length, ctx.sampleRate);
    buffer.getChannelData(0).set(this.table!);

    const source = ctx.createBufferSource();
    source.buffer = buffer;
    source.loop = true;
    source.playbackRate.value = this.rate();

    const gain = ctx.createGain();
    source.connect(gain);
    gain.connect(this.envGain!);

    if (this.voice) {
      const old = this.voice;
      old.gain.gain.setValueAtTime(1, now);
      old.gain.gain.linearRampToValueAtTime(0, now + CROSSFADE_S);
      old.source.stop(now + CROSSFADE_S + 0.01);
      gain.gain.setValueAtTime(0, now);
      gain.gain.linearRampToValueAtTime(1, now + CROSSFADE_S);
    } else {
      gain.gain.setValueAtTime(1, now);
    }
    source.start(now);
    this.voice = { source, gain };
  }
}
