import sys

from convergelab.cli import main

sys.exit(main())
