import sys

from singular_lue.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
