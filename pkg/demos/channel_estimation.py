"""Pilot-based MMSE channel estimation: closed-form error statistics and
their Monte Carlo counterparts.

Run:  python3 demos/channel_estimation.py
"""

import numpy as np

from sparselsfd import (
    NetworkConfig,
    assign_pilots,
    estimate_channels,
    estimation_stats,
    generate_network,
)


def main():
    # Single-antenna case: the estimate quality has a closed scalar form
    cfg = NetworkConfig(L=6, N=1, K=3, side_m=200.0, shadow_std_db=4.0,
                        noise_var=1.0, gain_offset_db=100.0)
    inst = generate_network(cfg, seed=5)
    plan = assign_pilots(inst.beta, tau_p=3)
    est = estimation_stats(inst, plan)
    snr = plan.tau_p * plan.rho_p
    print("UE AP   beta        estimate share B/beta")
    for k in range(cfg.K):
        for l in range(0, cfg.L, 2):
            beta = inst.beta[k, l]
            share = est.B[k, l][0, 0].real / beta  # = snr*beta/(snr*beta+1)
            print(f"{k:2d} {l:2d}   {beta:.3e}   {share:6.3f}"
                  f"   (closed form {snr * beta / (snr * beta + 1):6.3f})")

    # Sample second moment of the estimates approaches B as blocks grow
    cfg = NetworkConfig(L=4, N=2, K=3, side_m=200.0, shadow_std_db=4.0,
                        noise_var=1.0, gain_offset_db=100.0)
    inst = generate_network(cfg, seed=5)
    plan = assign_pilots(inst.beta, tau_p=2)  # forces pilot sharing
    est = estimation_stats(inst, plan)
    print("\nblocks   max Frobenius error of sample E{h_hat h_hat^H} vs B")
    for n_blocks in (200, 2000, 20000):
        _, hhat = estimate_channels(inst, plan, est, seed=5, n_blocks=n_blocks)
        worst = 0.0
        for k in range(cfg.K):
            for l in range(cfg.L):
                sample = np.einsum(
                    "bn,bm->nm", hhat[:, k, l], hhat[:, k, l].conj()
                ) / n_blocks
                err = np.linalg.norm(sample - est.B[k, l])
                worst = max(worst, err / np.linalg.norm(est.B[k, l]))
        print(f"{n_blocks:6d}   {worst:.4f}")

    # Co-pilot UEs ride the same observation: one estimate is a fixed
    # linear map of the other, so a least-squares fit leaves no residual
    users = max(plan.copilot, key=len)
    print(f"\npilot group {users}: fit h_hat_{users[1]} = M @ h_hat_{users[0]}")
    _, hhat = estimate_channels(inst, plan, est, seed=5, n_blocks=2000)
    i, j = users[0], users[1]
    for l in range(cfg.L):
        x = hhat[:, i, l]
        y = hhat[:, j, l]
        m = np.linalg.lstsq(x, y, rcond=None)[0]
        rel = np.linalg.norm(y - x @ m) / np.linalg.norm(y)
        print(f"AP {l}: relative fit residual {rel:.2e}")


if __name__ == "__main__":
    main()
