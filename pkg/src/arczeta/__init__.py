"""Exact Poincaré series of plane branch arc spaces, and p-adic verification tools.

The symbolic side works in the coefficient ring Q[L, L^-1, (L^i - 1)^-1]
(`arczeta.tate`) and with rational series over it (`arczeta.ratseries`).
Closed forms for plane branches live in `arczeta.branch`, Presburger-driven
summation in `arczeta.presburger` / `arczeta.ranges`, brute-force counters
over Z/p^(n+1) and F_q[t]/t^(n+1) in `arczeta.counting` / `arczeta.liftable`,
and the symbolic-vs-counted comparison logic in `arczeta.verifier`.
"""

__version__ = "0.1.0"
