from .adversary import adversary_act, craft_impersonation, field_span, flip_bit
from .engine import Event, EventKind, SimNode, SimulationError, World, run_scenario, step
from .links import CELLULAR, DSRC, WIFI, WIRED, LinkKind, LinkModel, default_link, transmit
from .trace import TraceLog, TraceRecord, parse_trace
