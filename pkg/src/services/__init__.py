# Grating resonance solver: numerical services
