# Grating resonance solver
