"""sbsim - calibratable building thermal simulator."""

__version__ = "0.1.0"
__description__ = "Grid-based building thermal simulator with HVAC energy balance and calibration"
