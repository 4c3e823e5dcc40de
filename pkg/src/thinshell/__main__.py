"""Module entry point: ``python -m thinshell`` runs the CLI."""

import sys

from .cli import main

sys.exit(main())
