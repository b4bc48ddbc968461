import sys

from ipmhull.cli import main

sys.exit(main())
