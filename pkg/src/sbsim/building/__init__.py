"""Building description: floorplans, devices and manifest configuration."""
