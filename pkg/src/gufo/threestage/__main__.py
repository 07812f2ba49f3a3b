# ---------------------------------------------------------------------
# Gufo Three-Stage: python -m gufo.threestage
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""Run command-line interface."""

# Python modules
import sys

# Gufo Labs modules
from .cli import main

sys.exit(main())
