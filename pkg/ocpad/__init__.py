"""
One-class fingerprint presentation attack detection with autoencoders.
"""

__version__ = "0.1.0"
