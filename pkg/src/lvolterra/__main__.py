"""Entry point for the lvolterra command."""

import sys

from lvolterra.cli import run


def main() -> None:
    """Run the lvolterra command line."""
    sys.exit(run())


if __name__ == "__main__":
    main()
