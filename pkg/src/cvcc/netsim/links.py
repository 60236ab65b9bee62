"""Radio and wired link models."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from ..errors import OutOfRange


class LinkKind(str, enum.Enum):
    DSRC = "DSRC"
    WIFI = "WiFi"
    CELLULAR = "Cellular"
    WIRED = "Wired"


@dataclass(frozen=True)
class LinkModel:
    kind: LinkKind
    data_rate: float  # bits/s
    latency: float  # s
    range_m: float = math.inf

    def __post_init__(self) -> None:
        if self.data_rate <= 0:
            raise ValueError("data_rate must be positive")
        if self.latency < 0:
            raise ValueError("latency must be non-negative")


# DSRC: 27 Mb/s, 200 us.  Its range is not given alongside those figures;
# 300 m is a configurable default.
DSRC = LinkModel(LinkKind.DSRC, 27e6, 200e-6, 300.0)
# 802.11a/g rate and the 140 m range; the 1 ms latency is a placeholder.
WIFI = LinkModel(LinkKind.WIFI, 54e6, 1e-3, 140.0)
# Latency is drawn per link from CELLULAR_LATENCY_RANGE when a world is built.
CELLULAR = LinkModel(LinkKind.CELLULAR, 2e6, 1.5)
CELLULAR_LATENCY_RANGE = (1.5, 3.5)
# RSU-to-cloud backhaul; both values are placeholders.
WIRED = LinkModel(LinkKind.WIRED, 1e9, 1e-3)

DEFAULTS = {m.kind: m for m in (DSRC, WIFI, CELLULAR, WIRED)}


def default_link(kind: LinkKind | str, **overrides) -> LinkModel:
    return replace(DEFAULTS[LinkKind(kind)], **overrides)


def transmit(link: LinkModel, size_bytes: int, distance: float | None = None) -> float:
    """Delivery time in seconds for one frame.

    Cellular traffic is relayed through a base station, so the one-hop cost
    is paid twice.
    """
    if size_bytes <= 0:
        raise ValueError("frame size must be positive")
    if distance is not None and distance > link.range_m:
        raise OutOfRange(f"{distance:.1f} m exceeds {link.kind.value} range {link.range_m} m")
    hop = link.latency + 8 * size_bytes / link.data_rate
    return 2 * hop if link.kind == LinkKind.CELLULAR else hop
