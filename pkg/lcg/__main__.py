"""Allow `python -m lcg`."""
from lcg.main import cli

cli()
