"""Constructive network builders with accuracy certificates."""

from .arithmetic import AccuracyCert, clamp_net, multiplier_net, power_tower_net
from .gadgets import analytic_gadget, box_muller_net, sum_of_uniforms_net
from .normal import (binary_search_inverter, inverse_normal_cdf_net, normal_cdf_net,
                     uniform_to_normal_net)
from .tent import SpaceFillingPlan, space_filling_net, tent_map_net

__all__ = [
    "AccuracyCert", "SpaceFillingPlan", "analytic_gadget", "binary_search_inverter", "box_muller_net",
    "clamp_net", "inverse_normal_cdf_net", "multiplier_net", "normal_cdf_net", "power_tower_net",
    "space_filling_net", "sum_of_uniforms_net", "tent_map_net", "uniform_to_normal_net",
]
