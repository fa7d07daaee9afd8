import sys
import os
import logging

# Add project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from config import settings
from cli.commands import ExitCode, run

# Configure logging
logging.basicConfig(level=settings.LOG_LEVEL, format=settings.LOG_FORMAT)
logger = logging.getLogger(__name__)

def main(argv=None):
    """
    Main entry point for the application.
    Dispatches one pipeline command and returns its exit code.
    """
    try:
        return run(argv)
    except KeyboardInterrupt:
        logger.info("Interrupted; shutting down.")
        return ExitCode.RUNTIME_ERROR
    except Exception as e:
        logger.critical(f"A critical error occurred: {e}", exc_info=True)
        return ExitCode.RUNTIME_ERROR

if __name__ == '__main__':
    sys.exit(main())
