"""Result record shared by the reconstruction pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import PointCloud
from .oracle import Alignment


@dataclass
class ReconstructionReport:
    """Recovered cloud plus verification status and per-phase counters.

    The alignment field is filled by callers that hold the source cloud and
    run the isometry oracle against the reconstruction.
    """

    cloud: PointCloud
    method: str
    verified: bool
    counters: dict = field(default_factory=dict)
    alignment: Alignment | None = None
