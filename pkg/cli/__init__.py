"""GateLab command-line interface."""
