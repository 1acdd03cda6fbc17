import sys

from ltvobs.cli import main

sys.exit(main())
