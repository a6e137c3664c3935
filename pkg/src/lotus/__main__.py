import sys

from lotus.cli import main

sys.exit(main())
