import sys

from wordloc.cli import main

sys.exit(main())
