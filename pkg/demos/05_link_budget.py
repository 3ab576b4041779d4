"""Outage probability and maximum reliable implant depth for a simple radio."""

import numpy as np

from invivo_channel import BodyArea, FieldZone, LinkBudgetSpec, MonteCarlo, max_reliable_depth, outage_probability
from invivo_channel.errors import NoFeasibleDepth

spec = LinkBudgetSpec(tx_power_dbm=10.0, rx_sensitivity_dbm=-45.0, required_margin_db=3.0)
print(f"allowed path loss: {spec.allowed_path_loss_db:.1f} dB")

area, zone = BodyArea.OVERALL_TORSO, FieldZone.NEAR
print("\ndepth  analytic   monte carlo")
for d in np.linspace(10, 100, 7):
    pa = outage_probability(spec, area, zone, d)
    pm = outage_probability(spec, area, zone, d, MonteCarlo(100_000, 1))
    print(f"{d:5.0f}  {pa:8.4f}   {pm:8.4f}")

print("\nmaximum depth at 10 % outage, by area and zone")
for a in BodyArea:
    cells = []
    for z in FieldZone:
        try:
            res = max_reliable_depth(spec, a, z, 0.1)
            cells.append(f"{res.depth_mm:6.1f}{'+' if res.saturated else ' '}")
        except NoFeasibleDepth:
            cells.append("   n/a ")
    print(f"  {a.value:<13} near {cells[0]} far {cells[1]}")
print("(+ means the link still closes at the 100 mm grid limit)")
