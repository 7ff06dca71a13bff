import sys

from kickedising.runner.cli import main

sys.exit(main())
