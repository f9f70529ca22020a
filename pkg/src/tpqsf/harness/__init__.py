"""Benchmark harness: scenarios, metrics, filter line-ups, reports and the CLI."""
