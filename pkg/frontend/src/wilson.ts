/** Wilson score interval, matching the Python harness bit for bit in
 * formula (z = 1.96). */
export function wilsonInterval(successes: number, trials: number, z = 1.96): [number, number] {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw new Error("need 0 <= successes <= trials, trials >= 1");
  }
  const p = successes / trials;
  const z2 = z * z;
  const denom = 1 + z2 / trials;
  const center = (p + z2 / (2 * trials)) / denom;
  const half = (z * Math.sqrt((p * (1 - p)) / trials + z2 / (4 * trials * trials))) / denom;
  return [Math.max(0, center - half), Math.min(1, center + half)];
}
