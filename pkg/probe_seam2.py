import math

from psq.exact import ModelParams, oracle_decompose, oracle_conditional_log
from psq.infinite import tail_asym_infinite
from psq.subcritical import (
    bl_nsigma_evaluate,
    bl_xsigma_evaluate,
    d2d3_curve_sigma,
)
from psq.errors import CurveSingularity

P6 = ModelParams(population=10**6, rho=0.25)
rho = 0.25

print("--- D2/D3 seam continuity ---")
for x in (0.5, 0.8, 1.2):
    s23 = d2d3_curve_sigma(x, rho)
    for eps in (1e-3, 1e-4):
        try:
            lo_sol, lo_ap = bl_xsigma_evaluate(x, s23 * (1 - eps), P6)
            hi_sol, hi_ap = bl_xsigma_evaluate(x, s23 * (1 + eps), P6)
            d_b1 = hi_sol.b1 - lo_sol.b1
            d_ln = hi_ap.log_value(10**6) - lo_ap.log_value(10**6)
            print(
                f"x={x} eps={eps:.0e}: regions {lo_sol.region}->{hi_sol.region} "
                f"d_b1={d_b1:.3e} d_ln={d_ln:.4e} "
                f"gam {lo_sol.gamma:.6f}/{hi_sol.gamma:.6f}"
            )
        except Exception as e:
            print(f"x={x} eps={eps:.0e}: {type(e).__name__}: {e}")
    # deep seam should now raise CurveSingularity (either side) or evaluate
    for side in (-1, 1):
        try:
            sol, ap = bl_xsigma_evaluate(x, s23 * (1 + side * 1e-6), P6)
            print(f"x={x} deep side={side:+d}: ok region={sol.region} gam={sol.gamma:.6f}")
        except CurveSingularity as e:
            print(f"x={x} deep side={side:+d}: CurveSingularity (clean)")
        except Exception as e:
            print(f"x={x} deep side={side:+d}: {type(e).__name__}: {e}")

print("--- corner row sigma=0.05, n=3, N=1e6 ---")
sigma = 0.05
t_val = sigma * (10**6) ** 0.75
bl = bl_nsigma_evaluate(3, sigma, P6).log_value(10**6)
co = tail_asym_infinite(3, t_val, rho).log_value(t_val)
print(f"t={t_val:.2f} bl={bl:.6f} corner={co:.6f} ratio=exp({bl-co:.6f})={math.exp(bl-co):.4f}")

print("--- oracle sigma ladder ---")
sigma = 1.0
for n in (0, 1):
    gaps = []
    for N in (32, 64):
        P = ModelParams(population=N, rho=rho)
        dec = oracle_decompose(P, digits=60)
        t = sigma * N**0.75
        ex = float(oracle_conditional_log(dec, n, t))
        asym = bl_nsigma_evaluate(n, sigma, P).log_value(N)
        gaps.append(asym - ex)
    print(
        f"n={n}: gap(32)={gaps[0]:+.4f} gap(64)={gaps[1]:+.4f} "
        f"|shrink|={abs(gaps[1]) <= abs(gaps[0])}"
    )
