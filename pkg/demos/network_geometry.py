"""Walk through the deployment model: wrap-around geometry, pathloss with
log-normal shadowing, and spatially correlated antennas at each AP.

Run:  python3 demos/network_geometry.py
"""

import numpy as np

from sparselsfd import NetworkConfig, generate_network
from sparselsfd.network import correlation_matrix, pathloss_db, wrap_distance


def main():
    # Geometry: distances on a torus so no UE sits at an artificial edge
    side = 500.0
    origin = np.zeros(2)
    for (dx, dy) in [(10.0, 0.0), (490.0, 0.0), (250.0, 250.0)]:
        d = wrap_distance(origin, np.array([dx, dy]), side, ap_height_m=10.0)
        print(f"offset ({dx:5.0f}, {dy:5.0f}) m -> wrapped 3D distance {d:7.2f} m")

    # Large-scale fading: UMi-style slope with shadowing on top
    print("\ndistance   pathloss (no shadowing)")
    for d in (10.0, 100.0, 1000.0):
        print(f"{d:7.1f} m  {pathloss_db(d):8.2f} dB")

    # Antenna correlation: small angular spread concentrates energy
    beta = 1.0
    for asd_deg in (2.0, 15.0, 60.0):
        r = correlation_matrix(beta, np.deg2rad(30.0), np.deg2rad(asd_deg), 4, 0.5)
        eig = np.linalg.eigvalsh(r)
        print(f"ASD {asd_deg:4.1f} deg -> correlation eigenvalues "
              + np.array2string(eig, precision=3))

    # A full instance: betas spread over tens of dB decide everything later
    cfg = NetworkConfig(L=10, N=2, K=4, side_m=500.0, shadow_std_db=4.0,
                        noise_var=1.0, gain_offset_db=124.0)
    inst = generate_network(cfg, seed=1)
    beta_db = 10.0 * np.log10(inst.beta)
    print(f"\n{cfg.L} APs x {cfg.K} UEs, normalized channel gains:"
          f" min {beta_db.min():6.1f} dB, median {np.median(beta_db):6.1f} dB,"
          f" max {beta_db.max():6.1f} dB")
    for k in range(cfg.K):
        order = np.argsort(beta_db[k])[::-1]
        print(f"UE {k}: strongest APs {order[:3]} "
              f"({beta_db[k, order[0]]:5.1f}, {beta_db[k, order[1]]:5.1f}, "
              f"{beta_db[k, order[2]]:5.1f} dB)")


if __name__ == "__main__":
    main()
