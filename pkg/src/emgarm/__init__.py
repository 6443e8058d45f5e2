"""Hardware-free sEMG gesture pipeline.

Streams synthetic 8-channel sEMG, windows and rasterizes it, classifies
gestures with a retrainable softmax head over a frozen feature backbone,
and dispatches debounced gesture commands over an authenticated TCP link
to a virtual 7-servo arm.
"""

from .gestures import GESTURES, Gesture, parse_gesture

__version__ = "0.1.0"

__all__ = ["Gesture", "GESTURES", "parse_gesture", "__version__"]
