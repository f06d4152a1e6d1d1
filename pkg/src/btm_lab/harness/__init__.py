"""Experiment configuration, suite orchestration, persistence and the CLI."""
