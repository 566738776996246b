import sys

from bbfiber.cli import main

sys.exit(main())
