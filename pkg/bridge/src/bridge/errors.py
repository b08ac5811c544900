"""Error taxonomy for the bridge.

Everything raised on purpose derives from BridgeError so the CLI can
catch one type and exit nonzero.  Input problems (unreadable tensors,
malformed manifests) surface as DecodeFailure; contract violations on
shapes as ShapeMismatch; missing model backends as BackboneUnavailable
or AnalyzerUnavailable; a non-finite training loss as
DivergenceDetected.
"""

from __future__ import annotations


class BridgeError(Exception):
    """Base class for all deliberate bridge failures."""


class DecodeFailure(BridgeError):
    """An input file (frame tensor, manifest, model dir) is unusable."""


class BackboneUnavailable(BridgeError):
    """The requested embedding backbone cannot be constructed."""


class AnalyzerUnavailable(BridgeError):
    """The requested series analyzer is not one we provide."""


class DivergenceDetected(BridgeError):
    """A training loss stopped being finite."""


class ShapeMismatch(BridgeError):
    """Array dimensions violate an operation's contract."""
