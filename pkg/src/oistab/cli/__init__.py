"""System-file DSL, reports and the command-line entry point."""
