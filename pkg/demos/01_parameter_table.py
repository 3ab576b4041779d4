"""Walk through the embedded parameter table and the linear depth model.

Prints every (area, zone) row, then evaluates the mean path loss and a few
shadowed draws at a handful of depths for the overall-torso fit.
"""

import numpy as np

from invivo_channel import PARAMETER_TABLE, BodyArea, FieldZone, lookup_params, mean_path_loss, sample_path_loss
from invivo_channel.model import REGION_PERMITTIVITY, half_wave_dipole_length_mm

print(f"{'area':<14}{'zone':<6}{'PL0 dB':>8}{'m':>7}{'sigma':>7}")
for (area, zone), p in PARAMETER_TABLE.items():
    print(f"{area.value:<14}{zone.value:<6}{p.pl0_db:>8.2f}{p.m:>7.2f}{p.sigma_db:>7.2f}")

torso = lookup_params(BodyArea.OVERALL_TORSO, FieldZone.NEAR)
depths = np.array([10.0, 25.0, 50.0, 100.0])
print("\nOverall torso, near field")
print("depth mm   mean dB   three draws")
rng = np.random.default_rng(7)
for d, mu in zip(depths, mean_path_loss(torso, depths)):
    draws = sample_path_loss(torso, d, rng, size=3)
    print(f"{d:8.0f}  {mu:8.2f}   " + "  ".join(f"{x:6.2f}" for x in draws))

# The antenna shrinks with the permittivity of the surrounding tissue.
print("\nhalf-wave dipole length at 915 MHz")
for region, eps in REGION_PERMITTIVITY.items():
    print(f"  {region.value}: eps_r={eps:g} -> {half_wave_dipole_length_mm(eps_r=eps):.1f} mm")
