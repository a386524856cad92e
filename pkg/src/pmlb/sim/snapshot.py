"""Single-instant balancing instances drawn from the scenario's channel model.

Expected loads are the mean demand of a UE over its band rate, with the
rate taken at the base CQI of the UE's mean SINR.  All UEs share one
arrival rate and packet size, as in the scenarios, so UEs with the same
CQI vector carry identical load rows.
"""

from __future__ import annotations

import numpy as np

from ..balancer import BalancerConfig, Instance, RepairError, camped_instance
from .channel import init_channel, rates_from_cqi
from .config import ScenarioConfig, named_scenario


def snapshot_instance(n_ues: int, rng: np.random.Generator, scenario: ScenarioConfig | None = None,
                      cfg: BalancerConfig | None = None, n_bands: int | None = None,
                      max_tries: int = 100) -> Instance:
    """A camped, feasible instance of ``n_ues`` UEs for the first ``n_bands`` bands.

    Draws are repeated until every UE meets ``r_min`` on some band and the
    camped assignment can be repaired into the UE caps.
    """
    scenario = scenario or named_scenario("A")
    cfg = cfg or scenario.balancer
    bands = tuple(scenario.bands[: n_bands or scenario.n_bands])
    demand = scenario.arrival_rate * scenario.packet_bits
    for _ in range(max_tries):
        ch = init_channel(n_ues, bands, scenario.channel, rng)
        rates = rates_from_cqi(ch.base_cqi, bands)
        if not (rates >= cfg.r_min).any(axis=1).all():
            continue
        try:
            return camped_instance(rates, np.full(n_ues, demand), ch.quality, bands, cfg)
        except RepairError:
            continue
    raise RuntimeError("could not draw a feasible instance")
