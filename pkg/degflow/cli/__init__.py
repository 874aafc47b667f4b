"""Command-line entry point: ``degflow <command>``."""
