"""AODV routing over Bluetooth scatternets on a slot-accurate discrete-event simulator."""

from .scenario import BUILTINS, Scenario, build_simulation, parse_scenario
from .simkernel import SimConfig, Simulator, TrafficFlow
from .topology import Scatternet

__all__ = ["BUILTINS", "Scenario", "Scatternet", "SimConfig", "Simulator", "TrafficFlow", "build_simulation", "parse_scenario"]
__version__ = "0.1.0"
