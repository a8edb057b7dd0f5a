import sys

from qcert.cli import main

sys.exit(main())
