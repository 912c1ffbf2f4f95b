import sys

from regimerisk.cli import main

sys.exit(main())
