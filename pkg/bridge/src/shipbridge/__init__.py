"""Adapter between off-the-shelf detectors and the shipbench file formats.

The bridge runs a detector over an image directory and writes
detection-exchange JSON lines (absolute pixel corners in the original image
frame), and translates a training-recipe document into a trainer-native
config. It holds no metric or geometry logic of its own; everything
quantitative lives behind the exchange formats.
"""

__version__ = "0.1.0"

from .config import BridgeConfig, BridgeError
from .detectors import RawDetection, StubDetector, load_detector
from .inference import InferenceResult, run_inference
from .recipe_export import SUPPORTED_FLAVORS, export_recipe

__all__ = [
    "__version__",
    "BridgeConfig",
    "BridgeError",
    "RawDetection",
    "StubDetector",
    "load_detector",
    "InferenceResult",
    "run_inference",
    "SUPPORTED_FLAVORS",
    "export_recipe",
]
