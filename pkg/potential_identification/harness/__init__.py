"""Run configuration, persistence and run logs for the command line."""
