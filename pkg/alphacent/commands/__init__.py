"""Sub-commands of the ``alphacent`` CLI; each module exposes ``setup(subparsers)``."""
