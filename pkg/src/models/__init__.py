# Grating resonance solver: data models
