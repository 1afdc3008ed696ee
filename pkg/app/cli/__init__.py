"""Command-line interface for the gammoid decider."""
