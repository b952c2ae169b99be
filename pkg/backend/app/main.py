"""
Ponto de entrada do pmaflow
"""
import sys

from app.api.cli import main

if __name__ == "__main__":
    sys.exit(main())
