"""Maximum-entropy inference, joint numerical ranges and discontinuity diagnostics for quantum states."""

__version__ = "0.1.0"
