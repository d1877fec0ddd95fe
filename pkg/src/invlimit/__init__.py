"""Inverse limits of interval and circle maps realised as attractors.

Submodules
----------
geometry
    Carrier surfaces, collar coordinates and the spine retraction.
families
    Tent, quadratic and standard circle families.
invlim
    Truncated threads, the product metric and epsilon-map audits.
suspension
    Fattened near-homeomorphisms, attractor clouds, covers and scans.
rotation
    Rotation numbers, rotation intervals and Arnold tongues.
estimators
    scikit-learn style wrappers.
harness
    Configuration, command line and acceptance checks.
"""

from .families import FamilyParam, entropy_estimate, stabilization_index
from .geometry import ANNULUS, DISK, ManifoldModel
from .invlim import Thread, d_infty
from .rotation import RotationInterval, rotation_interval, tongue_raster
from .suspension import FattenedMap, attract_cloud, hausdorff

__version__ = "0.1.0"

__all__ = [
    "ANNULUS",
    "DISK",
    "FamilyParam",
    "FattenedMap",
    "ManifoldModel",
    "RotationInterval",
    "Thread",
    "attract_cloud",
    "d_infty",
    "entropy_estimate",
    "hausdorff",
    "rotation_interval",
    "stabilization_index",
    "tongue_raster",
]
