import asyncio
import sys

# This adds the project root to the Python path.
# It allows us to run the engine from the root directory and have all imports work correctly.
sys.path.insert(0, '.')

from nqa_engine.interface.cli.main import main


if __name__ == "__main__":
    """
    The main entrypoint for the NQA engine.
    """
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        print("\nRun interrupted by user.", file=sys.stderr)
        sys.exit(130)
