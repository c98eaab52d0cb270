"""Discrete-event model of the converged WLAN-UMTS network."""

from convergelab.netsim.auth import AuthFailed, AuthResult, run_auth_session
from convergelab.netsim.engine import Engine, SchedulePastEvent, run_until, schedule
from convergelab.netsim.mac import CellState, wlan_mac_delay
from convergelab.netsim.scenario import InvalidScenario, Scenario, default_scenario, load_scenario, parse_scenario
from convergelab.netsim.sim import SimResult, Simulation, run_simulation
from convergelab.netsim.topology import CouplingMode, Dscp, Network, NodeKind, build_topology, route
from convergelab.netsim.traffic import TrafficProfile, gen_traffic
from convergelab.netsim.transport import Kind, Packet, Transport

__all__ = [
    "AuthFailed",
    "AuthResult",
    "CellState",
    "CouplingMode",
    "Dscp",
    "Engine",
    "InvalidScenario",
    "Kind",
    "Network",
    "NodeKind",
    "Packet",
    "Scenario",
    "SchedulePastEvent",
    "SimResult",
    "Simulation",
    "TrafficProfile",
    "Transport",
    "build_topology",
    "default_scenario",
    "gen_traffic",
    "load_scenario",
    "parse_scenario",
    "route",
    "run_auth_session",
    "run_simulation",
    "run_until",
    "schedule",
    "wlan_mac_delay",
]
