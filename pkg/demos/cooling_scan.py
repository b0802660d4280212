"""Which cooling time confines atoms best at nbar = 10?

Faster cooling fights heating harder, but each bath event also kicks atoms
up, so there is an optimum near 1 ms.
"""

from trapheat.cli import scan_cooling
from trapheat.config import RunConfig

values = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
rows, best = scan_cooling(RunConfig(nbar=10.0), values)
for inv_ms, s in rows:
    print(f"1/gamma_cool = {inv_ms:5.2f} ms   survival(60 ms) = {s:.4f}")
print("best:", best, "ms")
