// Canvas waveform drawing.

export function drawWaveform(
  ctx: CanvasRenderingContext2D,
  samples: ArrayLike<number> | null,
  width: number,
  height: number,
  color = "#4fc3f7",
  clear = true,
): void {
  if (clear) {
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, width, height);
    ctx.strokeStyle = "#2a3340";
    ctx.beginPath();
    ctx.moveTo(0, height / 2);
    ctx.lineTo(width, height / 2);
    ctx.stroke();
  }
  if (!samples || samples.length < 2) return;
  const mid = height / 2;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  for (let i = 0; i < samples.length; i++) {
    const x = (i / (samples.length - 1)) * width;
    const y = mid - samples[i] * (mid - 4);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
}
