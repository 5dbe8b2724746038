"""
Command line entry point for fan power baselines
"""
from app import cli

if __name__ == "__main__":
    cli()
