from . import convergence, export, spectrum, validate

COMMANDS = (validate, spectrum, convergence, export)
