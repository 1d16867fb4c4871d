import sys

from gfemad.cli import main

sys.exit(main())
