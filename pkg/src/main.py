#!/usr/bin/env python3
"""
Main entry point for the fractaldim toolkit.

This script configures logging and hands the command line over to the click
command group in cli.cli_main (gl-solve, quantize, dim, approx, verify).

Status: Development
"""

import logging
import sys

from cli.cli_main import cli

# Configure logging; stdout is reserved for primary outputs
logging.basicConfig(
    level=logging.WARNING,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler(sys.stderr)],
)


def main(argv=None):
    logging.debug("Starting fractaldim")
    cli.main(args=argv, prog_name="fractaldim")


if __name__ == "__main__":
    main()
