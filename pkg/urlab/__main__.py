"""
Main entry point for urlab module
"""

from .cli import main

if __name__ == "__main__":
    main()
