import sys

from qmqo.cli import main

sys.exit(main())
