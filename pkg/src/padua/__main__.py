import sys

from padua.cli import main

sys.exit(main())
