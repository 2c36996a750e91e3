"""Entry point for running relevant-sampling as a module."""

from relevant_sampling.cli import main

if __name__ == "__main__":
    main()
