"""Design the later-stage filters of the double-density dual-tree transform.

Produces a 3-channel tight-frame (oversampled by 3/2) filter bank h0, h1, h2
whose time reversals form the second tree:

    g0 = rev(h0),  g1 = rev(h2),  g2 = rev(h1)

Objectives (least squares on a frequency grid):
  * g0(n) ~ h0(n - 1/2) so the two scaling functions are half a sample apart;
  * the crossed reversal of the high-pass pair gives Hilbert pairs,
    H2(w) ~ j exp(-j w (N - 1/2)) conj(H1(w)) on (0, pi);
  * h2(n) ~ h1(n - 1) (weak), so the two wavelets of one tree are offset by
    half a sample at the next scale.

Constraints: perfect reconstruction of the undecimated-by-2, 3-channel bank
and two zeros of H0 at w = pi. The result is polished onto the constraint
set with Gauss-Newton minimum-norm steps and printed at 17 digits.

Run:  python3 tools/design_ddt_qshift.py            (full search, ~20 min)
      python3 tools/design_ddt_qshift.py --repolish out.txt
"""

import numpy as np
from scipy.optimize import minimize

N = 12
W = np.linspace(1e-3, np.pi - 1e-3, 400)
E = np.exp(-1j * np.outer(W, np.arange(N)))


def split(p):
    return p[:N], p[N:2 * N], p[2 * N:]


def pr_residual(p, dc_highpass=False):
    # polyphase form: E^T(1/z) E(z) = I for the 3x2 polyphase matrix E
    hs = split(p)
    m = N // 2
    ee = sum(np.convolve(h[0::2], h[0::2][::-1]) for h in hs)[m - 1:]
    oo = sum(np.convolve(h[1::2], h[1::2][::-1]) for h in hs)[m - 1:]
    eo = sum(np.convolve(h[0::2], h[1::2][::-1]) for h in hs)
    ee[0] -= 1.0
    oo[0] -= 1.0
    alt = (-1.0) ** np.arange(N)
    n = np.arange(N)
    vm = [np.sum(alt * hs[0]), np.sum(alt * n * hs[0])]
    if dc_highpass:
        # zero high-pass DC directly: with PR this pins sum(h0) = sqrt(2) to
        # rounding, whereas constraining sum(h0) leaves sqrt(residual) in H1(0)
        vm += [np.sum(hs[1]), np.sum(hs[2])]
    else:
        vm.append(np.sum(hs[0]) - np.sqrt(2.0))
    return np.concatenate([ee, oo, eo, vm])


def _residual_matrix(w_shift=0.05):
    # every objective term is linear in the taps: stack the real and
    # imaginary parts of those linear maps so objective = |M p|^2
    Z = np.zeros((len(W), N))
    ph = np.exp(-1j * W * (N - 1))[:, None]
    lp = ph * np.conj(E) - np.exp(-0.5j * W)[:, None] * E
    lp *= np.sqrt(np.where(W < 0.6 * np.pi, 1.0, 0.2))[:, None]
    hp1 = -1j * np.exp(-1j * W * (N - 0.5))[:, None] * np.conj(E)
    sh1 = -np.exp(-1j * W)[:, None] * E
    rows = [np.hstack([lp, Z, Z]),
            np.hstack([Z, hp1, E]),
            np.sqrt(w_shift) * np.hstack([Z, sh1, E])]
    M = np.vstack(rows) / np.sqrt(len(W))
    return np.vstack([M.real, M.imag])


M = _residual_matrix()
Q = M.T @ M


def objective(p):
    return p @ Q @ p


def objective_grad(p):
    return 2.0 * Q @ p


def polish(p, iters=50):
    for _ in range(iters):
        r = pr_residual(p, dc_highpass=True)
        if np.max(np.abs(r)) < 1e-16:
            break
        J = np.empty((r.size, p.size))
        eps = 1e-7
        for k in range(p.size):
            d = np.zeros_like(p)
            d[k] = eps
            J[:, k] = (pr_residual(p + d, True) - pr_residual(p - d, True)) / (2 * eps)
        p = p - np.linalg.lstsq(J, r, rcond=None)[0]
    return p


def report(p):
    h0, h1, h2 = split(p)
    if h0.sum() < 0:
        h0 = -h0
    print("max PR residual", np.max(np.abs(pr_residual(np.concatenate([h0, h1, h2]), True))))
    print("objective", objective(p))
    for name, h in (("h0", h0), ("h1", h1), ("h2", h2)):
        print(name, ",".join(f"{v:.17g}" for v in h))


def repolish(path):
    """Re-run only the final projection on a previously printed design."""
    taps = {}
    with open(path) as fh:
        for line in fh:
            if line[:3] in ("h0 ", "h1 ", "h2 "):
                taps[line[:2]] = [float(v) for v in line[3:].split(",")]
    report(polish(np.concatenate([taps["h0"], taps["h1"], taps["h2"]])))


def main(starts=200, seed=7):
    rng = np.random.default_rng(seed)
    # Kingsbury Q-shift lowpass as a seed for h0
    q = np.array([0.03516384, 0, -0.08832942, 0.23389032, 0.76027237,
                  0.58751830, 0, -0.11430184, 0, 0, 0, 0])
    best = None
    for s in range(starts):
        p0 = np.concatenate([q, rng.normal(scale=0.3, size=2 * N)])
        p0[:N] += rng.normal(scale=0.02, size=N)
        res = minimize(objective, p0, jac=objective_grad, method="SLSQP",
                       constraints=[{"type": "eq", "fun": pr_residual}],
                       options={"maxiter": 2000, "ftol": 1e-14})
        if np.max(np.abs(pr_residual(res.x))) > 1e-6:
            continue
        if best is None or res.fun < best.fun:
            best = res
            print(f"start {s}: objective {res.fun:.3e}")
    report(polish(best.x))


if __name__ == "__main__":
    import sys

    if len(sys.argv) == 3 and sys.argv[1] == "--repolish":
        repolish(sys.argv[2])
    else:
        main()
