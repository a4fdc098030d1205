# Entry point for `python -m suspicion`, equivalent to the `suspicion` command.
# The CLI itself lives in `_suspicion.cli`, so that importing it never runs it.

import sys

from _suspicion.cli import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
