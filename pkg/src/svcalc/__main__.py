import sys

from svcalc.cli import main

sys.exit(main())
