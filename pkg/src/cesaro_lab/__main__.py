import sys

from cesaro_lab.cli import main

sys.exit(main())
