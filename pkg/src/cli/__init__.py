# Grating resonance solver: command-line front end
