"""Energy-efficient coordinated beamforming for multi-cell MISO downlink."""

__version__ = "0.1.0"
