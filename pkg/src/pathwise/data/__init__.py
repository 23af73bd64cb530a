"""Bundled reference snapshots and the demo dataset generator."""
