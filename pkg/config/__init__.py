# Grating resonance solver: environment settings
